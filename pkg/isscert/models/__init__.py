from .polynomial import Polynomial, PolyMatrix, PolyEvaluator  # NOQA
from .expression import LinearPoly, LinearPolyMatrix  # NOQA
from .library import FunctionLibrary  # NOQA
from .signal import Signal, SignalSpec  # NOQA
from .system import TrueSystem  # NOQA
from .dataset import Dataset, Trajectory  # NOQA
from .ellipsoid import EllipsoidModel, SampleQuadric  # NOQA
from .comparison import ClassKInfty, MatrixClassKInfty  # NOQA
from .certificate import Certificate, SosCertificate, SosReport  # NOQA
