"""
JSON schemas for every file the toolkit reads.
Files are validated with jsonschema before they are turned into objects.
"""


STRATEGY_SCHEMA = {
    "type": "object",
    "oneOf": [
        {
            "properties": {
                "probs": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1}
            },
            "required": ["probs"],
        },
        {
            "properties": {
                "counts": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
                "k": {"type": "integer", "minimum": 1},
            },
            "required": ["counts", "k"],
        },
    ],
}


PROFILE_SCHEMA = {
    "type": "object",
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "strategies": {"type": "array", "items": STRATEGY_SCHEMA},
        "default": STRATEGY_SCHEMA,
    },
    "required": ["strategies"],
}


CORRELATED_SCHEMA = {
    "type": "object",
    "properties": {
        "k": {"type": "integer", "minimum": 1},
        "support": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {
                    "actions": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                    "weight": {"type": "number", "exclusiveMinimum": 0},
                    "count": {"type": "integer", "minimum": 1},
                },
                "required": ["actions"],
            },
        },
    },
    "required": ["support"],
}


EXPLICIT_GAME_SCHEMA = {
    "type": "object",
    "properties": {
        "family": {"const": "explicit"},
        "n": {"type": "integer", "minimum": 1},
        "m": {"type": "integer", "minimum": 1},
        "payoffs": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
    },
    "required": ["n", "m", "payoffs"],
}


FAMILY_SCHEMA = {
    "type": "object",
    "properties": {
        "family": {
            "enum": [
                "explicit",
                "random_explicit",
                "matching_pennies",
                "observer",
                "majority_mp",
                "xor",
            ]
        },
        "seed": {"type": "integer"},
    },
    "required": ["family"],
}


# A bare {n, m, payoffs} object is an explicit game
DESCRIPTOR_SCHEMA = {"anyOf": [FAMILY_SCHEMA, EXPLICIT_GAME_SCHEMA]}
