# Python package
