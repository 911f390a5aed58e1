from sqlalchemy.ext.declarative import declarative_base

SqlBase = declarative_base()
