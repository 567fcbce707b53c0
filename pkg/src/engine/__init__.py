# Simulation runners and trace diagnostics.
