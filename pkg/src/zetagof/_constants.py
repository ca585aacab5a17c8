import math

from scipy.special import bernoulli

# B_{2j} / (2j)! for j = 1..13, the Euler-Maclaurin correction coefficients
EM_TERMS = 12
_B = bernoulli(2 * (EM_TERMS + 1))
EM_COEF = [float(_B[2 * j]) / math.factorial(2 * j) for j in range(1, EM_TERMS + 2)]
