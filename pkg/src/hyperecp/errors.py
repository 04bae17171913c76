"""Exception hierarchy shared across the package."""


class HyperEcpError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateStateError(HyperEcpError):
    """A state construction collapsed to the zero vector."""


class ShapeError(HyperEcpError):
    """Mismatched photon sets, absent subsystems or invalid bipartitions."""


class NormalizationError(HyperEcpError):
    """A probability or amplitude constraint is violated."""


class CoherenceLossError(HyperEcpError):
    """A constant DOF relabel would merge kets that both carry amplitude."""


class AliasingError(HyperEcpError):
    """An overwrite channel was given identical target and control."""


class ProtocolOrderError(HyperEcpError):
    """Homodyne readout requested for probes that were never tagged."""


class PreconditionError(HyperEcpError):
    """A gadget received a state outside its declared input form."""


class CompletenessError(HyperEcpError):
    """A dense channel's operators do not resolve the identity."""


class ConfigError(HyperEcpError):
    """Invalid run configuration (CLI flags, config file or parameters)."""
