"""
********************************************************************************
* Name: workflow_step
* Created On: March 10, 2026
********************************************************************************
"""
import json
import logging
import uuid
from copy import deepcopy

from ..mixins import StatusMixin, AttributesMixin, OptionsMixin
from ..utilities import json_serializer

log = logging.getLogger(f'mismeasure.{__name__}')
__all__ = ['Step']


class Step(StatusMixin, AttributesMixin, OptionsMixin):
    """
    One stage of an estimation pipeline.

    Status Progression:
    1. STATUS_PENDING = Step has not been started yet.
    2. STATUS_WORKING = Processing on step has been started but not complete.
    3. STATUS_ERROR = ValueError (invalid configuration or data) has occurred.
    4. STATUS_FAILED = Processing error has occurred.
    5. STATUS_NOT_CONVERGED = Step finished but some fits did not converge.
    6. STATUS_COMPLETE = Step has been completed successfully.
    7. STATUS_SKIPPED = Step did not apply (e.g. no covariates to residualize).
    """  # noqa: E501
    TYPE = 'generic_step'
    ATTR_STATUS_MESSAGE = 'status_message'
    SERIALIZED_FIELDS = ['id', 'type', 'name', 'help']

    def __init__(self, name=None, help='', options=None, **kwargs):
        self.id = str(uuid.uuid4())
        self.type = self.TYPE
        self.name = name or self.__class__.__name__
        self.help = help
        self.workflow = None

        # Set initial status
        self.set_status(self.ROOT_STATUS_KEY, self.STATUS_PENDING)

        # Initialize parameters
        self._parameters = self.init_parameters(**kwargs)

        if options is not None:
            self.options = options
        else:
            self._options = self.default_options

    def __str__(self):
        return '<{} name="{}" id="{}" >'.format(self.__class__.__name__, self.name, self.id)

    def __repr__(self):
        return self.__str__()

    @property
    def complete(self):
        return self.get_status(default=self.STATUS_PENDING) in self.COMPLETE_STATUSES

    def init_parameters(self, **kwargs):
        """
        Initialize the parameters for this step.

        Returns:
            dict<name:dict<help,value,required>>: Dictionary of all parameters with their initial value set.
        """
        return {}

    def to_dict(self):
        """
        Serialize Step into a dictionary.

        Returns:
            dict: dictionary representation of Step.
        """
        d = {k: getattr(self, k) for k in self.SERIALIZED_FIELDS}
        d['status'] = self.get_status()
        d['options'] = self.options
        d['parameters'] = {name: data['value'] for name, data in self.get_parameters().items()}
        return d

    def to_json(self):
        """
        Serialize Step, including parameters, to json.

        Returns:
            str: JSON string representation of Step.
        """
        return json.dumps(self.to_dict(), default=json_serializer, sort_keys=True)

    def validate(self):
        """
        Validates parameter values of this step. If the parameter values of this step are invalid a ValueError will be raised
        """  # noqa: E501
        for name, param in self._parameters.items():
            if param.get('required') and param['value'] is None:
                raise ValueError('Parameter "{}" is required.'.format(name))

    def set_parameter(self, name, value):
        """
        Sets the value of the named parameter.

        Args:
            name(str): Name of the parameter to set.
            value(varies): Value of the parameter.
        """
        if name not in self._parameters:
            raise ValueError('No parameter named "{}" in this step.'.format(name))
        self._parameters[name]['value'] = value

    def get_parameter(self, name):
        """
        Get value of the named parameter.

        Args:
            name(str): name of parameter.

        Returns:
            varies: Value of the named parameter.
        """
        try:
            return self._parameters[name]['value']
        except KeyError:
            raise ValueError('No parameter named "{}" in step "{}".'.format(name, self))

    def get_parameters(self):
        """
        Get all parameter objects.
        Returns:
            dict<name:dict<help,value>>: Dictionary of all parameters with their current value.
        """
        return deepcopy(self._parameters)

    def parse_parameters(self, parameters):
        """
        Parse parameters from a dictionary, ignoring unknown names.
        """
        for name, value in parameters.items():
            try:
                self.set_parameter(name, value)
            except ValueError:
                pass

    def run(self, context):
        """
        Do the work of the step.

        Args:
            context(dict): shared pipeline state; the step reads its inputs from it and writes its outputs to it.

        Returns:
            str: status to record (STATUS_COMPLETE when None).
        """
        raise NotImplementedError('Must implement run().')

    def execute(self, context):
        """
        Run the step with status bookkeeping: failures are recorded on the step before the exception propagates.
        """
        log.info(f'Starting step "{self.name}".')
        self.set_status(self.ROOT_STATUS_KEY, self.STATUS_WORKING)
        try:
            self.validate()
            status = self.run(context) or self.STATUS_COMPLETE
        except ValueError as e:
            self.set_status(self.ROOT_STATUS_KEY, self.STATUS_ERROR)
            self.set_attribute(self.ATTR_STATUS_MESSAGE, str(e))
            raise
        except Exception as e:
            self.set_status(self.ROOT_STATUS_KEY, self.STATUS_FAILED)
            self.set_attribute(self.ATTR_STATUS_MESSAGE, f'{type(e).__name__}: {e}')
            raise

        self.set_status(self.ROOT_STATUS_KEY, status)
        log.info(f'Step "{self.name}" finished with status "{status}".')
        return status

    def reset(self):
        """
        Resets the step back to its initial state.
        """
        self.set_status(self.ROOT_STATUS_KEY, self.STATUS_PENDING)
        self.set_attribute(self.ATTR_STATUS_MESSAGE, None)
        values = {name: data['value'] for name, data in self._parameters.items()}
        self._parameters = self.init_parameters()
        self.parse_parameters(values)
