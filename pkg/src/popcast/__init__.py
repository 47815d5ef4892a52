"""popcast: univariate annual population forecasting benchmark toolkit."""

__version__ = "0.1.0"
