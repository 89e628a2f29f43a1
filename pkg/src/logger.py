import logging

ERROR = 0
NORMAL = 1
WARNING = 2
DEBUG = 3

verbosity = NORMAL
history = []

_LEVELS = {
    ERROR: logging.ERROR,
    NORMAL: logging.INFO,
    WARNING: logging.WARNING,
    DEBUG: logging.DEBUG,
}

# Messages go to stderr through `logging`; stdout is kept for command output.
_logger = logging.getLogger("goalrec")


def setup(level):
    global verbosity
    verbosity = level
    if not logging.getLogger().handlers:
        logging.basicConfig(format="%(message)s")
    _logger.setLevel(logging.DEBUG)


def log(comment, level=NORMAL):
    history.append((level, comment))

    if level <= verbosity:
        _logger.log(_LEVELS.get(level, logging.INFO), comment)


def getLast():
    '''
    Returns the last logged comment, without Level
    '''
    return history[-1][1]


def clear():
    history.clear()
