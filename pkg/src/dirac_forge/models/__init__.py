"""Action functionals built from simple-type Dirac operators."""
