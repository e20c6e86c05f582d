import json


class StatusMixin(object):
    """
    Provides methods for implementing the status pattern.
    """
    STATUS_PENDING = 'Pending'
    STATUS_WORKING = 'Working'
    STATUS_COMPLETE = 'Complete'
    STATUS_SKIPPED = 'Skipped'
    STATUS_NOT_CONVERGED = 'Not Converged'
    STATUS_ERROR = 'Error'
    STATUS_FAILED = 'Failed'
    STATUS_NONE = 'None'

    OK_STATUSES = [STATUS_COMPLETE, STATUS_SKIPPED]
    ERROR_STATUSES = [STATUS_FAILED, STATUS_ERROR]
    WORKING_STATUSES = [STATUS_PENDING, STATUS_WORKING]
    COMPLETE_STATUSES = [STATUS_COMPLETE, STATUS_SKIPPED, STATUS_NOT_CONVERGED]

    ROOT_STATUS_KEY = 'root'

    status = None

    @classmethod
    def valid_statuses(cls):
        return [cls.STATUS_PENDING, cls.STATUS_WORKING, cls.STATUS_COMPLETE, cls.STATUS_SKIPPED,
                cls.STATUS_NOT_CONVERGED, cls.STATUS_ERROR, cls.STATUS_FAILED, cls.STATUS_NONE]

    def get_status(self, key=ROOT_STATUS_KEY, default=None):
        """
        Get status for a given key.
        """
        status_dict = {} if self.status is None else json.loads(self.status)
        return status_dict.get(key) or default

    def set_status(self, key=ROOT_STATUS_KEY, status=None):
        """
        Set status for given key.
        """
        if status not in self.valid_statuses() and status is not None:
            raise ValueError(f'"{status}" is not a valid status.')

        status_dict = {} if self.status is None else json.loads(self.status)
        status_dict[key] = status
        self.status = json.dumps(status_dict)
