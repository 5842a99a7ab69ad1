# constants of the microsphere experiment, in dimensionless scaled units unless noted

# micrometres per dimensionless length unit
MICRONS_PER_UNIT = 10.0

# refractive index of the surrounding glass
BACKGROUND_INDEX = 1.5

# peak of n^2 - 1 inside a microsphere (n_rel = 1.43)
MICROSPHERE_AMPLITUDE = 1.04
MICROSPHERE_RADIUS = 0.45
MICROSPHERE_SEPARATION = 1.2

# Omega = (-b, b)^2 x (-D1, D2); Gamma is the top face x3 = D2
HALF_WIDTH = 3.75
D1 = 6.8
D2 = 0.7

# measurement plane
PLANE_Z = 49.5
PLANE_COUNTS = (100, 100)

# wavenumber band used by the reconstruction
K_LOWER = 108.3
K_UPPER = 119.7
# top wavenumber as printed next to the smallness bound
K_BOUND = 119.6

PARTITION_SIZE = 6
INNER_ITERATIONS = 3
C_MAX = 6.0
STOPPING_WINDOW_START = 3

# centre wavelengths of the narrow-pass filters, micrometres, and the matching wavenumbers
MEASURED_WAVELENGTHS = (0.420, 0.473, 0.525, 0.580, 0.620, 0.671)
MEASURED_WAVENUMBERS = (149.5, 132.8, 119.7, 108.3, 101.3, 93.6)

MODULUS_FLOOR = 1e-12
