"""Front dynamics for the bistable (Zeldovich) reaction-diffusion equation with a localized defect."""

__version__ = "0.1.0"
