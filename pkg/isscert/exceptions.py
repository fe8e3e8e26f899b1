"""More friendly certificate synthesis exceptions"""


class IssCertException(Exception):
    pass


class DimensionError(IssCertException, ValueError):
    pass


class CompilationError(IssCertException):
    pass


class BilinearError(CompilationError):
    pass


class SolverException(IssCertException):
    pass


class InfeasibleException(IssCertException):
    def __init__(self, message, diagnostics=None):
        super(InfeasibleException, self).__init__(message)
        self.diagnostics = diagnostics or []


class NoiseBoundException(IssCertException):
    pass


class CertificateRejectedException(IssCertException):
    def __init__(self, message, reports=None):
        super(CertificateRejectedException, self).__init__(message)
        self.reports = reports or []


class ConfigException(IssCertException):
    pass


class ProvenanceException(IssCertException):
    pass
