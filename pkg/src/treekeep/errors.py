"""Exception types shared across the package."""


class TreekeepError(Exception):
    """Base class for errors raised by treekeep."""


class InputShapeError(TreekeepError):
    """A tree was applied to data that lacks the columns it splits on."""


class TreeFormatError(TreekeepError):
    """A tree document could not be parsed or violates a tree invariant."""


class DataLoadError(TreekeepError):
    """A dataset file is missing, unparseable, or malformed."""


class ConfigError(TreekeepError):
    """An experiment or generator configuration is invalid."""
