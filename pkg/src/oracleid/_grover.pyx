# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled statevector kernels for the search subroutines.

Layout: a register of ``k`` index qubits plus one target qubit, stored as a
flat complex array of length ``2 * dim`` with ``dim = 2**k``; entry
``2*v + b`` is the amplitude of index value ``v`` with target bit ``b``.

One oracle application permutes amplitudes by ``b -> b XOR marked[v]``.
With the target prepared in the (|0> - |1>)/sqrt(2) state this realizes the
usual phase marking, so each search iteration costs exactly one oracle
application.
"""

BACKEND = "compiled"


def oracle_permute(double complex[::1] amps, const unsigned char[::1] marked):
    """Apply the oracle once: swap the target pair wherever marked[v] is 1."""
    cdef Py_ssize_t dim = marked.shape[0]
    cdef Py_ssize_t v
    cdef double complex tmp
    for v in range(dim):
        if marked[v]:
            tmp = amps[2 * v]
            amps[2 * v] = amps[2 * v + 1]
            amps[2 * v + 1] = tmp


def grover_run(double complex[::1] amps, const unsigned char[::1] marked,
               Py_ssize_t iterations):
    """Run ``iterations`` rounds of oracle + inversion-about-the-mean in place.

    The diffusion acts on the index register only, i.e. separately within
    each target slice.  The caller accounts one oracle query per iteration.
    """
    cdef Py_ssize_t dim = marked.shape[0]
    cdef Py_ssize_t v, it
    cdef double complex tmp, s0, s1, t0, t1
    for it in range(iterations):
        for v in range(dim):
            if marked[v]:
                tmp = amps[2 * v]
                amps[2 * v] = amps[2 * v + 1]
                amps[2 * v + 1] = tmp
        s0 = 0
        s1 = 0
        for v in range(dim):
            s0 = s0 + amps[2 * v]
            s1 = s1 + amps[2 * v + 1]
        t0 = 2.0 * s0 / dim
        t1 = 2.0 * s1 / dim
        for v in range(dim):
            amps[2 * v] = t0 - amps[2 * v]
            amps[2 * v + 1] = t1 - amps[2 * v + 1]


def index_probabilities(const double complex[::1] amps, double[::1] out):
    """Measurement distribution of the index register (target traced out)."""
    cdef Py_ssize_t dim = out.shape[0]
    cdef Py_ssize_t v
    cdef double complex a, b
    for v in range(dim):
        a = amps[2 * v]
        b = amps[2 * v + 1]
        out[v] = a.real * a.real + a.imag * a.imag + b.real * b.real + b.imag * b.imag
