"""Exception hierarchy shared by the compilers and executors."""


class DAQCError(Exception):
    """Base class for all package errors."""


class DimensionError(DAQCError, ValueError):
    pass


class CompileError(DAQCError):
    """Raised when a target cannot be compiled onto the given resource."""


class SingularGeneratorSet(CompileError):
    """The sandwich generator set does not span the target couplings (e.g. N=4 all-to-all)."""


class ZeroResourceCoupling(CompileError):
    pass


class NoRemediation(CompileError):
    pass


class SingularPairSystem(CompileError):
    pass


class RankDeficient(CompileError):
    pass


class ExecutionError(DAQCError):
    pass


class PulseOverlap(ExecutionError):
    pass


class GeneratorUndefined(ExecutionError):
    pass


class NegativeDuration(ExecutionError):
    pass


class ConfigError(DAQCError, ValueError):
    pass
