from .SimConfig import SimConfig, ProtocolConfig, ParticipantConfig, OutputConfig
from .detector import Announcement, DeviationEvidence, DeviationDetector, Explanation, AwarenessSet, detect, honest_explanation
from .RunLog import RunLog, RunSummary, metrics, trajectory_frame
from .Simulation import Simulation, run
from .trials import TrialResult, double_spend_trials, engine_double_spend_trials, race_config, race_to_depth, simulated_race
