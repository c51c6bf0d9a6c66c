class ProcessingResult:
    """Class to store the outcome of one pipeline command"""

    def __init__(self, success=False, message="", data=None, artifacts=None):
        self.success = success
        self.message = message
        self.data = data
        self.artifacts = artifacts or {}

    def to_dict(self):
        """Convert the processing result to a dictionary"""
        return {
            'success': self.success,
            'message': self.message,
            'data': self.data,
            'artifacts': self.artifacts
        }
