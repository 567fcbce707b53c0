# Application modules.
