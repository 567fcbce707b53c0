# Reporting package.
