"""
********************************************************************************
* Name: test_workflow.py
* Created On: March 14, 2026
********************************************************************************
"""
import json
import unittest

from ...models import EstimationWorkflow, Step


class _AddStep(Step):
    TYPE = 'add_step'

    def init_parameters(self, **kwargs):
        return {'amount': {'help': 'Amount to add.', 'value': kwargs.get('amount', 1), 'required': True}}

    def run(self, context):
        context['total'] = context.get('total', 0) + self.get_parameter('amount')


class _SkipStep(Step):
    def run(self, context):
        return self.STATUS_SKIPPED


class _BrokenStep(Step):
    def __init__(self, error, **kwargs):
        super().__init__(**kwargs)
        self.error = error

    def run(self, context):
        raise self.error


class StepTests(unittest.TestCase):

    def test_initial_state(self):
        step = _AddStep(name='add', amount=3)
        self.assertEqual('add_step', step.type)
        self.assertEqual(Step.STATUS_PENDING, step.get_status())
        self.assertFalse(step.complete)
        self.assertEqual(3, step.get_parameter('amount'))

    def test_unknown_parameter(self):
        step = _AddStep()
        with self.assertRaises(ValueError):
            step.set_parameter('missing', 1)
        with self.assertRaises(ValueError):
            step.get_parameter('missing')

    def test_required_parameter(self):
        step = _AddStep()
        step.set_parameter('amount', None)
        with self.assertRaises(ValueError):
            step.execute({})
        self.assertEqual(Step.STATUS_ERROR, step.get_status())
        self.assertIn('amount', step.get_attribute(Step.ATTR_STATUS_MESSAGE))

    def test_execute_complete(self):
        context = {'total': 1}
        status = _AddStep(amount=2).execute(context)
        self.assertEqual(Step.STATUS_COMPLETE, status)
        self.assertEqual(3, context['total'])

    def test_execute_failure(self):
        step = _BrokenStep(RuntimeError('boom'))
        with self.assertRaises(RuntimeError):
            step.execute({})
        self.assertEqual(Step.STATUS_FAILED, step.get_status())
        self.assertEqual('RuntimeError: boom', step.get_attribute(Step.ATTR_STATUS_MESSAGE))

    def test_execute_value_error(self):
        step = _BrokenStep(ValueError('bad input'))
        with self.assertRaises(ValueError):
            step.execute({})
        self.assertEqual(Step.STATUS_ERROR, step.get_status())

    def test_reset_keeps_parameters(self):
        step = _AddStep(amount=5)
        step.execute({})
        step.reset()
        self.assertEqual(Step.STATUS_PENDING, step.get_status())
        self.assertEqual(5, step.get_parameter('amount'))
        self.assertIsNone(step.get_attribute(Step.ATTR_STATUS_MESSAGE))

    def test_invalid_status(self):
        with self.assertRaises(ValueError):
            _AddStep().set_status(Step.ROOT_STATUS_KEY, 'Sleeping')

    def test_to_json(self):
        d = json.loads(_AddStep(name='add', amount=2).to_json())
        self.assertEqual('add', d['name'])
        self.assertEqual({'amount': 2}, d['parameters'])
        self.assertEqual('Pending', d['status'])


class EstimationWorkflowTests(unittest.TestCase):

    def setUp(self):
        self.first = _AddStep(name='first', amount=1)
        self.skip = _SkipStep(name='skip')
        self.last = _AddStep(name='last', amount=10)
        self.workflow = EstimationWorkflow('test', steps=[self.first, self.skip, self.last])

    def test_add_step_rejects_non_steps(self):
        with self.assertRaises(ValueError):
            self.workflow.add_step(object())

    def test_run(self):
        context = self.workflow.run(total=0)
        self.assertEqual(11, context['total'])
        self.assertTrue(self.workflow.complete)
        self.assertEqual(Step.STATUS_SKIPPED, self.skip.get_status())
        self.assertIs(self.workflow, self.first.workflow)

    def test_status_progression(self):
        self.assertEqual(Step.STATUS_PENDING, self.workflow.get_status())
        self.first.execute({})
        self.assertEqual(EstimationWorkflow.STATUS_CONTINUE, self.workflow.get_status())
        self.assertEqual((1, self.skip), self.workflow.get_next_step())

    def test_run_skips_complete_steps(self):
        self.workflow.run(total=0)
        context = self.workflow.run(total=0)
        self.assertEqual(0, context['total'])

    def test_failure_stops_the_run(self):
        broken = _BrokenStep(RuntimeError('boom'), name='broken')
        workflow = EstimationWorkflow('broken', steps=[broken, _AddStep(name='after')])
        with self.assertRaises(RuntimeError):
            workflow.run()
        self.assertEqual(Step.STATUS_PENDING, workflow.get_step_by_name('after').get_status())
        self.assertEqual(Step.STATUS_FAILED, workflow.get_status())

    def test_next_steps_and_reset(self):
        self.workflow.run(total=0)
        self.assertEqual([self.skip, self.last], self.workflow.get_next_steps(self.first))
        self.workflow.reset_next_steps(self.first)
        self.assertTrue(self.first.complete)
        self.assertFalse(self.skip.complete)
        self.assertFalse(self.last.complete)
        with self.assertRaises(ValueError):
            self.workflow.get_next_steps(_AddStep())

    def test_get_step_by_name(self):
        self.assertIs(self.last, self.workflow.get_step_by_name('last'))
        self.assertIsNone(self.workflow.get_step_by_name('missing'))

    def test_to_json(self):
        d = json.loads(self.workflow.to_json())
        self.assertEqual(['first', 'skip', 'last'], [s['name'] for s in d['steps']])


if __name__ == '__main__':
    unittest.main()
