# Controllers package
import logging

from models.errors import TwinError

logger = logging.getLogger(__name__)


def failure(error, action):
    """
    Map an exception to the (result, exit_code) pair returned by controllers

    Args:
        error: Exception raised while handling a command
        action: Short description used in the error message

    Returns:
        Tuple of result dictionary and exit code
    """
    if isinstance(error, TwinError):
        logger.error("%s failed: %s", action, error)
        return error.to_dict(), error.exit_code
    if isinstance(error, OSError):
        logger.error("%s failed: %s", action, error)
        return {
            'success': False,
            'error': f'Failed to {action}',
            'kind': 'usage',
            'details': str(error)
        }, 2
    logger.exception("%s failed unexpectedly", action)
    return {
        'success': False,
        'error': f'Failed to {action}',
        'kind': 'internal',
        'details': str(error)
    }, 1
