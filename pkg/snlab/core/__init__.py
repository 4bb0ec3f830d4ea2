# Empty file to make core a package
