"""
********************************************************************************
* Name: workflow
* Created On: March 10, 2026
********************************************************************************
"""
import json
import logging
import uuid

from ..mixins import AttributesMixin, StatusMixin
from ..utilities import json_serializer
from .workflow_step import Step

log = logging.getLogger(f'mismeasure.{__name__}')
__all__ = ['EstimationWorkflow']


class EstimationWorkflow(AttributesMixin):
    """
    Ordered list of pipeline steps sharing one context dictionary.
    """
    STATUS_CONTINUE = 'Continue'
    COMPLETE_STATUSES = StatusMixin.COMPLETE_STATUSES

    def __init__(self, name, steps=None, attributes=None):
        self.id = str(uuid.uuid4())
        self.name = name
        self.steps = []
        self.context = {}
        for step in steps or []:
            self.add_step(step)
        if attributes:
            self.attributes = attributes

    def __repr__(self):
        return f'<{self.__class__.__name__} name="{self.name}" id="{self.id}">'

    @property
    def complete(self):
        return all(step.complete for step in self.steps)

    def add_step(self, step):
        if not isinstance(step, Step):
            raise ValueError(f'Expected a Step, got {type(step).__name__}.')
        step.workflow = self
        self.steps.append(step)
        return step

    def get_next_step(self):
        """
        Return the next step object, based on the status of the steps.

        Returns:
            int, Step: the index of the next step and the next step.
        """
        idx = 0
        step = None
        for idx, step in enumerate(self.steps):
            if not step.complete:
                return idx, step

        # Return last step and index if none complete
        return idx, step

    def get_status(self):
        """
        Returns the status of the next workflow step.
        """
        index, next_step = self.get_next_step()
        status = next_step.get_status(Step.ROOT_STATUS_KEY) if next_step else Step.STATUS_NONE

        # If we are not on the first step and the status is pending, workflow status is continue
        if status == Step.STATUS_PENDING and index > 0:
            return self.STATUS_CONTINUE

        return status

    def get_step_by_name(self, name):
        """
        Get the step from the workflow with given name (None if not found).
        """
        for step in self.steps:
            if step.name == name:
                return step

    def get_next_steps(self, step):
        """
        Get all steps following the given step.
        """
        if step not in self.steps:
            raise ValueError('Step {} does not belong to this workflow.'.format(step))

        step_index = self.steps.index(step)
        return self.steps[step_index + 1:]

    def reset_next_steps(self, step, include_current=False):
        """
        Reset all steps following the given step that are not PENDING.
        """
        for s in self.get_next_steps(step):
            if s.get_status(s.ROOT_STATUS_KEY) != s.STATUS_PENDING:
                s.reset()

        if include_current:
            step.reset()

    def run(self, **context):
        """
        Execute the steps that are not complete yet, in order.

        Args:
            context: initial entries of the shared context (e.g. data, config, seed).

        Returns:
            dict: the shared context after the last step.
        """
        self.context.update(context)
        for step in self.steps:
            if step.complete:
                continue
            step.execute(self.context)
        log.info(f'Workflow "{self.name}" finished with status "{self.get_status()}".')
        return self.context

    def to_dict(self):
        return {
            'id': self.id,
            'name': self.name,
            'status': self.get_status(),
            'steps': [step.to_dict() for step in self.steps],
            'attributes': self.attributes,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), default=json_serializer, sort_keys=True)
