# Scenario files, presets and batch runs.
