# Graph model, robustness checks and constructors.
