import math


class Tolerances:
    """Numeric tolerances shared by every module."""

    # Probability vectors
    PROBABILITY_INPUT = 1e-12
    PROBABILITY_COMPUTED = 1e-10

    # Regret comparisons: regret <= epsilon + REGRET counts as satisfied
    REGRET = 1e-9
    KERNEL_AGREEMENT = 1e-9

    # Grid coordinates and two-point colorings
    GRID_COORDINATE = 1e-12


class Guards:
    """Size guards that keep the exact paths desk-scale."""

    EXACT_PROFILES = 2 ** 24
    IR_OPPONENT_PROFILES = 2 ** 20
    XOR_DIMENSION = 20
    XOR_KAPPA = (1, 5)
    DISC_COLUMNS = 30
    CUBE_EXHAUSTIVE_PLAYERS = 24
    GRID_STRATEGIES = 10 ** 7
    ENUMERABLE_PLAYERS = 10 ** 7
    MATRIX_RETRIES = 10 ** 4


class Defaults:
    """Default parameters for experiments."""

    MAX_ATTEMPTS = 10
    OBSERVER_WIDTH = 1.0
    MC_CONFIDENCE_LOG = math.log(200)
    CORRESPONDENCE_THRESHOLD = 0.4
    AUDIT_THRESHOLD = 0.25
    OBSERVER_AUDIT_SAMPLES = 200
    SEARCH_BUDGET = 10 ** 6
    REVERSE_SAMPLES = 10 ** 5
    FLIP_CHECKS = 64
