from .race import (RaceQuery, SafetyPolicy, SafeWindow, NoSafeWindow, RaceEstimate, UnasBound, race_probability,
                   race_log_probability, exhaustive_race, monte_carlo_race, min_safe_window, lifetime_threshold,
                   unas_rate_bound, exp_fork_trajectory, sweep_alpha, alpha_grid, QUOTED_WINDOWS)
