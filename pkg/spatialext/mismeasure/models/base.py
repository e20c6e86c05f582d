"""
********************************************************************************
* Name: base.py
* Created On: March 2, 2026
********************************************************************************
"""
import json

import param

from ..exceptions import InvalidSpecError
from ..utilities import json_serializer

__all__ = ['SpecBase']


class SpecBase(param.Parameterized):
    """
    Base for validated, immutable configuration records.

    Scalar bounds and selectors are declared on the parameters themselves. Cross-field rules belong in
    validate(), which runs after construction. Any violation is raised as InvalidSpecError.
    """  # noqa: E501

    def __init__(self, **params):
        params.setdefault('name', self.__class__.__name__)
        try:
            super().__init__(**params)
        except (ValueError, TypeError) as e:
            raise InvalidSpecError(self._colloquialize_validation_error(str(e))) from e
        self.validate()

    def __eq__(self, other):
        return type(self) is type(other) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash((self.__class__.__name__, self.to_json()))

    def __repr__(self):
        args = ', '.join(f'{k}={v!r}' for k, v in self.to_dict().items())
        return f'{self.__class__.__name__}({args})'

    def __reduce__(self):
        return (_rebuild_spec, (self.__class__, self.to_dict()))

    def validate(self):
        """
        Check cross-field rules. Raise InvalidSpecError on violation.
        """

    def to_dict(self):
        """
        Serialize the parameter values (excluding the param name) into a dictionary.

        Returns:
            dict: parameter name to value.
        """
        d = {}
        for k, v in self.param.values().items():
            if k == 'name':
                continue
            d[k] = list(v) if isinstance(v, tuple) else v
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), default=json_serializer, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        """
        Build an instance from a dictionary, ignoring keys that are not parameters.
        """
        known = {k: v for k, v in d.items() if k in cls.param and k != 'name'}
        return cls(**known)

    def replace(self, **changes):
        """
        Return a copy with the given parameter values changed.
        """
        d = self.to_dict()
        d.update(changes)
        return self.__class__(**d)

    @classmethod
    def _colloquialize_validation_error(cls, message):
        """
        Translate ValueError messages given by param to something the user can understand (e.g.: "Number parameter 'FieldSpec.variance' must be at least 0" to "FieldSpec: variance must be at least 0").
        """  # noqa: E501
        prefix = f'{cls.__name__}.'
        if prefix in message:
            message = message.replace(prefix, '')
        return f'{cls.__name__}: {message}'


def _rebuild_spec(klass, values):
    return klass(**values)
