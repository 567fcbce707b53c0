# Makes config a package.
