# -*- coding: utf-8 -*-
# ------------------------------------------------------------------------------
#
#   Copyright 2026 Valory AG
#
#   Licensed under the Apache License, Version 2.0 (the "License");
#   you may not use this file except in compliance with the License.
#   You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
#   Unless required by applicable law or agreed to in writing, software
#   distributed under the License is distributed on an "AS IS" BASIS,
#   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#   See the License for the specific language governing permissions and
#   limitations under the License.
#
# ------------------------------------------------------------------------------

"""This module contains the exceptions raised by the metrology package."""


class MetrologyError(Exception):
    """Base class of every error raised by this package."""


class StateValidationError(MetrologyError):
    """A state violates normalization, hermiticity, positivity or its cutoff."""


class CutoffTooSmallError(MetrologyError):
    """The truncated probability mass exceeds the admissible tail tolerance."""


class InvalidParametersError(MetrologyError):
    """A constructor or operation received parameters outside its domain."""


class DimensionMismatchError(MetrologyError):
    """Objects defined on different truncated spaces were combined."""


class PovmValidationError(MetrologyError):
    """A POVM is not Hermitian, not positive or not complete."""


class CoherenceMismatchError(MetrologyError):
    """A sector decomposition was requested where number coherences forbid it."""


class SingularFisherMatrixError(MetrologyError):
    """A Fisher matrix could not be inverted."""


class InvalidFisherInformationError(MetrologyError):
    """A Cramer-Rao bound was requested for a non-positive Fisher information."""


class DegenerateRotationError(MetrologyError):
    """The rotation axis is undefined because the rotation is trivial."""


class InconsistentInputsError(MetrologyError):
    """Inputs contradict each other, e.g. a QFI above the coherent ceiling."""


class EmptySampleError(MetrologyError):
    """An estimator was handed no outcomes."""


class UnknownSectorError(MetrologyError):
    """An outcome carries a number sector the estimator does not know."""


class ConfigurationError(MetrologyError):
    """A configuration file or experiment description is invalid."""
