# Settings package for tolerances, guards, defaults and file schemas
