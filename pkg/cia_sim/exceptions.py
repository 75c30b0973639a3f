"""Errors raised by cia_sim."""


class CiaSimError(Exception):
    """Base class for cia_sim errors."""

    key = "cia_sim_error"

    def as_report(self) -> dict:
        """Return a machine-readable description of the error."""
        return {"error": self.key, "message": str(self)}


class DegenerateChannel(CiaSimError):
    """Error to indicate the interference channel lost rank."""

    key = "degenerate_channel"


class RepeatedRoots(CiaSimError):
    """Error to indicate coinciding channel roots could not be resolved."""

    key = "repeated_roots"


class VfdmDegenerate(CiaSimError):
    """Error to indicate no root-based stream survived orthonormalization."""

    key = "vfdm_degenerate"


class NotPositiveDefinite(CiaSimError):
    """Error to indicate a covariance is not positive definite."""

    key = "not_positive_definite"


class AllZeroEigenvalues(CiaSimError):
    """Error to indicate there is no channel to pour power into."""

    key = "all_zero_eigenvalues"


class DimensionMismatch(CiaSimError):
    """Error to indicate inconsistent matrix dimensions."""

    key = "dimension_mismatch"


class InvalidConfig(CiaSimError):
    """Error to indicate an invalid experiment configuration."""

    key = "invalid_config"


class ResultsWriteError(CiaSimError):
    """Error to indicate results could not be written."""

    key = "io_error"
