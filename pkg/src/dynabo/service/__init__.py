"""HTTP control plane: start runs, stream events, submit and override priors."""

from dynabo.service.app import create_app

__all__ = ["create_app"]
