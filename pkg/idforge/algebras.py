"""
# Identity Forge: algebras.py

Structure-constant algebras and the matrix models that produce them.

An algebra is held as one table per operation:
the table of an r-ary operation has shape (m, ..., m) with r + 1 axes,
entry [i_1, ..., i_r, k] being the kth coordinate of the product of basis elements.
Tables are kept in the field's working representation (see `exactfield`).

**Copyright 2024–2026 Conway**
Licensed under the GNU General Public License v3.0 (GPL-3.0-only).
This is free software with NO WARRANTY etc. etc., see LICENSE.
"""

import functools
import itertools
import logging
from fractions import Fraction
from math import comb, factorial

import numpy as np
import sympy

from idforge.exactfield import (
    ExactMatrix, Q_SQRT2, QuadExtRational, QuadraticField,
    field_from_spec, free_variable_basis, rref,
)
from idforge.freeops import (
    Monomial, MultilinearPoly, SymmetryAxiom,
    axiom_from_name, operation_set_from_name,
)


logger = logging.getLogger(__name__)

HALF_SQRT2 = QuadExtRational(0, Fraction(1, 2))
EXHAUSTIVE_ENTRY_LIMIT = 2 ** 22


class AlgebraException(Exception):
    def __init__(self, message):
        self.message = message

    def __str__(self):
        return self.message


def _inverse_entries(field, matrix):
    size = matrix.shape[0]
    augmented = np.concatenate([matrix, field.identity(size)], axis=1)
    rank, reduced = rref(ExactMatrix(field, augmented))
    if rank < size or np.any(field.nonzero(reduced.entries[:, :size] - field.identity(size))):
        raise AlgebraException('Gram matrix is singular; the trace form is degenerate on this basis')
    return reduced.entries[:, size:]


class MatrixBasis:
    """
    A basis of a space of square matrices, with coordinates taken through the trace form:
    coordinates(X) = G^{-1} (Tr(X B_1^T), ..., Tr(X B_k^T)) for the Gram matrix G.
    """
    def __init__(self, field, stack, gram_inverse=None):
        self.field = field
        self.stack = stack
        self.working = field.to_working(stack)
        self.transposed = field.transpose(self.working, (0, 2, 1))
        if gram_inverse is None:
            gram = field.from_working(field.tensordot(self.working, self.transposed, ([1, 2], [1, 2])))
            gram_inverse = _inverse_entries(field, gram)
        self.gram_inverse = gram_inverse
        self.gram_inverse_working = field.to_working(gram_inverse)

    @property
    def dim(self):
        return self.stack.shape[0]

    def pairing(self, matrices):
        """
        Trace pairings Tr(X B_k^T), for working matrices X of shape (..., N, N).
        """
        rank = len(matrices.shape)
        return self.field.tensordot(matrices, self.transposed, ([rank - 2, rank - 1], [1, 2]))

    def coordinates(self, matrices):
        pairing = self.pairing(matrices)
        return self.field.tensordot(pairing, self.gram_inverse_working, ([len(pairing.shape) - 1], [1]))

    def combination(self, coordinates):
        """
        The matrices sum_k c_k B_k, for working coordinates of shape (..., k).
        """
        return self.field.tensordot(coordinates, self.working, ([len(coordinates.shape) - 1], [0]))

    def reduced(self, prime_field):
        return MatrixBasis(prime_field, prime_field.array(self.stack), prime_field.array(self.gram_inverse))


class ReductivePair:
    """
    A decomposition h ⊕ m of a matrix Lie algebra, h ⊥ m under the trace form,
    with [h, h] ⊆ h and [h, m] ⊆ m.
    """
    def __init__(self, h, m):
        self.h = h
        self.m = m
        self.field = m.field

    def reduced(self, prime_field):
        return ReductivePair(self.h.reduced(prime_field), self.m.reduced(prime_field))


def pairwise_products(field, left, right):
    """
    All products l_i r_j of two stacks (i, a, b) and (j, b, c), as (i, j, a, c).
    """
    return field.transpose(field.tensordot(left, right, ([2], [1])), (0, 2, 1, 3))


def commutators(field, left, right):
    forward = pairwise_products(field, left, right)
    backward = pairwise_products(field, right, left)
    return field.subtract(forward, field.transpose(backward, (1, 0, 2, 3)))


def triple_coordinates(field, basis, left, middle, right):
    """
    Coordinates in `basis` of all products l_i m_j r_k, as (i, j, k, c).

    Pairs through Tr(l m r B^T) = sum (l m)_{ab} (r B^T)_{ba}, never forming the triple products.
    """
    first = pairwise_products(field, left, middle)
    closing = pairwise_products(field, right, basis.transposed)
    pairing = field.tensordot(first, closing, ([2, 3], [3, 2]))
    return field.tensordot(pairing, basis.gram_inverse_working, ([3], [1]))


def symmetrised_triples(field, basis, stack):
    """
    Coordinates of abc + cba over a stack closed under that product.
    """
    coordinates = triple_coordinates(field, basis, stack, stack, stack)
    return field.add(coordinates, field.transpose(coordinates, (2, 1, 0, 3)))


def ly_tables(pair):
    """
    Tables of [A, B] = p_m([A, B]) and <A, B, C> = [p_h([A, B]), C] on m.
    """
    field = pair.field
    brackets = commutators(field, pair.m.working, pair.m.working)
    binary = pair.m.coordinates(brackets)
    h_parts = pair.h.coordinates(brackets)
    action = pair.m.coordinates(commutators(field, pair.h.working, pair.m.working))
    ternary = field.tensordot(h_parts, action, ([2], [0]))
    return binary, ternary


def ljy_tables(pair):
    """
    Tables of [A, B] = p_m(AB - BA) and {A, B, C} = p_m(ABC + CBA) on m.
    """
    field = pair.field
    m = pair.m.working
    binary = pair.m.coordinates(commutators(field, m, m))
    return binary, symmetrised_triples(field, pair.m, m)


def _unit_matrix(size, row, col):
    matrix = np.zeros((size, size), dtype=np.int64)
    matrix[row, col] = 1
    return matrix


def symmetric_basis(n):
    """
    Orthonormal basis of the symmetric n×n matrices under Tr(AB):
    E_ii in order, then (E_ij + E_ji)/√2 for i < j.
    """
    field = Q_SQRT2
    matrices = [field.array(_unit_matrix(n, i, i)) for i in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        matrices.append(field.array(_unit_matrix(n, i, j) + _unit_matrix(n, j, i)) * HALF_SQRT2)
    return np.array(matrices, dtype=object).reshape(len(matrices), n, n)


def skew_basis(n):
    """
    Basis E_ij - E_ji (i < j) of so(n).
    """
    matrices = [_unit_matrix(n, i, j) - _unit_matrix(n, j, i) for i, j in itertools.combinations(range(n), 2)]
    return np.array(matrices, dtype=np.int64).reshape(len(matrices), n, n)


class MatrixModel:
    """
    The reductive decomposition so(N-1) = L ⊕ M from so(n) acting on symmetric matrices.

    H is the space of symmetric n×n matrices with orthonormal basis
    {E_ii} ∪ {(E_ij + E_ji)/√2}, N = n(n+1)/2 coordinates.
    L = so(n) acts on H by commutators, fixing I_n;
    U = so(N-1) is realised as the skew N×N matrices annihilating the coordinates of I_n,
    spanned by w_a w_b^T - w_b w_a^T for the basis w of the complement of I_n
    (e_k - e_{k+1} on the diagonal coordinates, then the off-diagonal coordinates).
    M is the orthogonal complement of L in U under the trace form.

    Dimensions are available straight after construction;
    the bases of U and M are built on first use.
    """
    def __init__(self, n):
        if n < 3:
            raise MatrixModel.SmallOrderException(n)

        field = Q_SQRT2
        self.n = n
        self.N = n * (n + 1) // 2
        self.field = field

        self.h_basis = MatrixBasis(field, symmetric_basis(n))
        self.l_basis = field.array(skew_basis(n))
        self.l_image = self._adjoint_images()
        self.complement = self._identity_complement()

        self.pairs = list(itertools.combinations(range(self.N - 1), 2))
        self.m_coefficients = self._complement_coefficients()

        if self.dim_m != self.dim_u - self.dim_l:
            raise RuntimeError('Implementation error: M is not complementary to L in U')

        logger.info('matrix model n=%d: dim L=%d, dim U=%d, dim M=%d', n, self.dim_l, self.dim_u, self.dim_m)

    def _adjoint_images(self):
        field = self.field
        brackets = commutators(field, field.to_working(self.l_basis), self.h_basis.working)
        coordinates = self.h_basis.coordinates(brackets)
        return field.from_working(field.transpose(coordinates, (0, 2, 1)))

    def _identity_complement(self):
        n, N = self.n, self.N
        complement = np.zeros((N - 1, N), dtype=np.int64)
        for k in range(n - 1):
            complement[k, k] = 1
            complement[k, k + 1] = -1
        for offset in range(N - n):
            complement[n - 1 + offset, n + offset] = 1
        return complement

    def _complement_coefficients(self):
        """
        Coordinates, over the wedge basis of U, of a basis of the orthogonal complement of L.

        For skew X the pairing with w_a w_b^T - w_b w_a^T is 2 w_a^T X w_b,
        so the pairing matrix is read off W X W^T without forming U.
        """
        field = self.field
        w = field.array(self.complement)
        sandwiches = np.array([
            field.matmul(field.matmul(w, image), w.T)
            for image in self.l_image
        ], dtype=object).reshape(self.dim_l, self.N - 1, self.N - 1)
        rows, cols = zip(*self.pairs)
        pairing = sandwiches[:, list(rows), list(cols)]
        return free_variable_basis(ExactMatrix(field, pairing))

    @property
    def dim_l(self):
        return self.l_basis.shape[0]

    @property
    def dim_u(self):
        return len(self.pairs)

    @property
    def dim_m(self):
        return len(self.m_coefficients)

    @functools.cached_property
    def u_basis(self):
        w = self.complement
        matrices = [np.outer(w[a], w[b]) - np.outer(w[b], w[a]) for a, b in self.pairs]
        return self.field.array(np.array(matrices, dtype=np.int64))

    @functools.cached_property
    def m_basis(self):
        field = self.field
        coefficients = np.array(self.m_coefficients, dtype=object).reshape(self.dim_m, self.dim_u)
        combined = field.tensordot(field.to_working(coefficients), field.to_working(self.u_basis), ([1], [0]))
        return field.from_working(combined)

    @functools.cached_property
    def pair(self):
        return ReductivePair(MatrixBasis(self.field, self.l_image), MatrixBasis(self.field, self.m_basis))

    def identity_coordinates(self):
        return [1] * self.n + [0] * (self.N - self.n)

    def projections(self, matrices):
        """
        The parts p_L(X) and p_M(X) of working matrices X in U.
        """
        h, m = self.pair.h, self.pair.m
        return h.combination(h.coordinates(matrices)), m.combination(m.coordinates(matrices))

    def reductive_defects(self):
        """
        Counts of nonzero entries left when [L, L] is projected onto L and [L, M] onto M.
        """
        field = self.field
        l_working = self.pair.h.working
        m_working = self.pair.m.working

        def outside(matrices, part):
            residual = field.subtract(matrices, self.projections(matrices)[part])
            return int(np.count_nonzero(field.working_nonzero(residual)))

        return (
            outside(commutators(field, l_working, l_working), 0),
            outside(commutators(field, l_working, m_working), 1),
        )

    class SmallOrderException(AlgebraException):
        def __init__(self, n):
            super().__init__(f'matrix size n = {n} is too small (need n ≥ 3; n = 2 gives the trivial case)')


@functools.lru_cache(maxsize=None)
def build_matrix_model(n):
    return MatrixModel(n)


class StructureConstantAlgebra:
    def __init__(self, name, field, operations, tables, n=None):
        self.name = name
        self.field = field
        self.operations = operations
        self.tables = dict(tables)
        self.n = n

        dims = {table.shape[0] for table in self.tables.values()}
        if len(dims) != 1:
            raise StructureConstantAlgebra.DimensionMismatchException(name, sorted(dims))
        self.dim = dims.pop()
        for opening, table in self.tables.items():
            arity = operations.signature_from_opening[opening].arity
            if table.shape != (self.dim,) * (arity + 1):
                raise StructureConstantAlgebra.DimensionMismatchException(name, table.shape)

    def table(self, opening):
        try:
            return self.tables[opening]
        except KeyError:
            raise StructureConstantAlgebra.MissingOperationException(self.name, opening)

    def table_entries(self, opening):
        return self.field.from_working(self.table(opening))

    @property
    def binary(self):
        return self.table_entries('[')

    @property
    def ternary(self):
        return self.table_entries('(')

    def product(self, opening, *vectors):
        """
        Product of working vectors, by contracting the table one slot at a time.
        """
        result = self.table(opening)
        for vector in vectors:
            result = self.field.tensordot(vector, result, ([0], [0]))
        return result

    def basis_vector(self, index):
        unit = np.zeros(self.dim, dtype=np.int64)
        unit[index] = 1
        return self.field.working_from_ints(unit)

    def reduce(self, prime_field):
        if not isinstance(self.field, QuadraticField):
            raise AlgebraException(f'algebra `{self.name}` is already over {self.field.spec}')
        tables = {
            opening: table.reduce_mod(prime_field)
            for opening, table in self.tables.items()
        }
        return StructureConstantAlgebra(self.name, prime_field, self.operations, tables, self.n)

    def to_json(self):
        """
        Nonzero structure constants at canonical index tuples
        (the least tuple in each orbit of the operation's slot symmetries).
        """
        document = {
            'name': self.name,
            'n': self.n,
            'dim': self.dim,
            'field': self.field.spec,
            'operations': self.operations.name,
            'signatures': [str(signature) for signature in self.operations.signatures],
            'tables': {},
        }
        for opening, table in self.tables.items():
            signature = self.operations.signature_from_opening[opening]
            entries = self.field.from_working(table)
            nonzero = np.any(self.field.nonzero(entries), axis=-1)
            rows = []
            for index in zip(*np.nonzero(nonzero)):
                index = tuple(int(i) for i in index)
                if min(tuple(index[slot] for slot in arrangement) for arrangement, _ in signature.slot_group()) != index:
                    continue
                rows.append([*index, [self.field.entry_to_json(entry) for entry in entries[index]]])
            document['tables'][opening] = rows
        return document

    @staticmethod
    def from_json(document):
        try:
            field = field_from_spec(document['field'])
            operations = operation_set_from_name(document['operations'])
            dim = document['dim']
            name = document['name']
            rows_from_opening = {
                opening: (operations.signature_from_opening[opening], rows)
                for opening, rows in document['tables'].items()
            }
        except KeyError as exception:
            raise StructureConstantAlgebra.MalformedDocumentException(exception)

        tables = {}
        for opening, (signature, rows) in rows_from_opening.items():
            entries = field.zeros((dim,) * (signature.arity + 1))
            for *index, coordinates in rows:
                vector = np.array([field.entry_from_json(value) for value in coordinates], dtype=object)
                vector = field.array(vector)
                for arrangement, sign in signature.slot_group():
                    image = tuple(index[slot] for slot in arrangement)
                    entries[image] = field.normalise(vector * sign)
            tables[opening] = field.to_working(entries)
        for signature in operations.signatures:
            tables.setdefault(signature.opening, field.working_zeros((dim,) * (signature.arity + 1)))
        return StructureConstantAlgebra(name, field, operations, tables, document.get('n'))

    def __str__(self):
        return '\n'.join([
            f'StructureConstantAlgebra(',
            f'  name={self.name!r},',
            f'  dim={self.dim},',
            f'  field={self.field.spec},',
            f'  operations={self.operations},',
            f')',
        ])

    class DimensionMismatchException(AlgebraException):
        def __init__(self, name, shapes):
            super().__init__(f'tables of algebra `{name}` have inconsistent shapes {shapes}')

    class MalformedDocumentException(AlgebraException):
        def __init__(self, key):
            super().__init__(f'malformed algebra document: missing key {key}')

    class MissingOperationException(AlgebraException):
        def __init__(self, name, opening):
            super().__init__(f'algebra `{name}` hath no operation `{opening}`')


def _model_pair(pair, field):
    if isinstance(field, QuadraticField):
        return pair
    return pair.reduced(field)


def build_LY(n, field=Q_SQRT2):
    pair = _model_pair(build_matrix_model(n).pair, field)
    binary, ternary = ly_tables(pair)
    return StructureConstantAlgebra(f'LY{n}', field, operation_set_from_name('ly'), {'[': binary, '(': ternary}, n)


def build_LJY(n, field=Q_SQRT2, operations_name='ljy'):
    pair = _model_pair(build_matrix_model(n).pair, field)
    binary, ternary = ljy_tables(pair)
    return StructureConstantAlgebra(
        f'LJY{n}', field, operation_set_from_name(operations_name), {'[': binary, '(': ternary}, n,
    )


def build_zero(dim, operations, field=Q_SQRT2):
    tables = {
        signature.opening: field.working_zeros((dim,) * (signature.arity + 1))
        for signature in operations.signatures
    }
    return StructureConstantAlgebra(f'zero{dim}', field, operations, tables)


X, Y = sympy.symbols('x y')


def _partial(form, x_order, y_order):
    for _ in range(x_order):
        form = sympy.diff(form, X)
    for _ in range(y_order):
        form = sympy.diff(form, Y)
    return form


def transvectant(f, g, k):
    """
    The kth transvection (f g)_k = sum_i (-1)^i C(k, i) ∂^k f/∂x^{k-i}∂y^i ∂^k g/∂x^i∂y^{k-i}.
    """
    return sympy.expand(sum(
        (-1) ** i * comb(k, i) * _partial(f, k - i, i) * _partial(g, i, k - i)
        for i in range(k + 1)
    ))


def normalised_transvectant(f, g, k, m, n):
    """
    (f g)_k for forms of degrees m and n, scaled by (m-k)!(n-k)!/(m!n!).
    """
    scale = sympy.Rational(factorial(m - k) * factorial(n - k), factorial(m) * factorial(n))
    return sympy.expand(scale * transvectant(f, g, k))


def poisson_bracket(f, g):
    return sympy.expand(sympy.diff(f, X) * sympy.diff(g, Y) - sympy.diff(f, Y) * sympy.diff(g, X))


def binary_form_basis(degree):
    return [X ** (degree - i) * Y ** i for i in range(degree + 1)]


def binary_form_coordinates(form, degree):
    polynomial = sympy.Poly(form, X, Y)
    coordinates = []
    for i in range(degree + 1):
        coefficient = sympy.Rational(polynomial.coeff_monomial(X ** (degree - i) * Y ** i))
        coordinates.append(Fraction(int(coefficient.p), int(coefficient.q)))
    return coordinates


def _sextic_products(lam, mu, nu):
    """
    Exact tables (as Fractions) of m_1·m_2 = ν(m_1 m_2)_3 and {m_1, m_2, m_3} = λμ((m_1 m_2)_5 m_3)_1 on P(6),
    all transvections normalised.
    """
    sextics = binary_form_basis(6)
    binary = np.empty((7, 7, 7), dtype=object)
    ternary = np.empty((7, 7, 7, 7), dtype=object)
    fifth = {}
    for i, j in itertools.product(range(7), repeat=2):
        binary[i, j] = binary_form_coordinates(nu * normalised_transvectant(sextics[i], sextics[j], 3, 6, 6), 6)
        fifth[i, j] = normalised_transvectant(sextics[i], sextics[j], 5, 6, 6)
    for i, j, k in itertools.product(range(7), repeat=3):
        form = normalised_transvectant(fifth[i, j], sextics[k], 1, 2, 6)
        ternary[i, j, k] = binary_form_coordinates(lam * mu * form, 6)
    return binary, ternary


def build_LY3_transvection(field=Q_SQRT2, lam=6, mu=15, nu=10):
    """
    LY_3 on P(6) with basis x^{6-i} y^i, from the transvection model of so(5) = P(2) ⊕ P(6).
    """
    binary, ternary = _sextic_products(sympy.sympify(lam), sympy.sympify(mu), sympy.sympify(nu))
    tables = {
        '[': field.to_working(field.array(binary)),
        '(': field.to_working(field.array(ternary)),
    }
    return StructureConstantAlgebra('LY3-transvection', field, operation_set_from_name('ly'), tables, 3)


def build_transvection_lie(field=Q_SQRT2, lam=6, mu=15, nu=10):
    """
    The 10-dimensional algebra P(2) ⊕ P(6) with bracket
    [ℓ_1 + m_1, ℓ_2 + m_2] = λ(ℓ_1ℓ_2)_1 + μ(m_1m_2)_5 + λ(ℓ_1m_2)_1 - λ(ℓ_2m_1)_1 + ν(m_1m_2)_3,
    a Lie algebra exactly when 10λμ = 9ν².

    Transvections are normalised, except that P(2) brackets with itself
    through the same Poisson scale λ/12 with which it acts on P(6).
    """
    lam, mu, nu = sympy.sympify(lam), sympy.sympify(mu), sympy.sympify(nu)
    action_scale = lam * sympy.Rational(1, 12)
    quadratics = binary_form_basis(2)
    sextics = binary_form_basis(6)
    forms = [(2, form) for form in quadratics] + [(6, form) for form in sextics]
    bracket = np.empty((10, 10, 10), dtype=object)
    for i, j in itertools.product(range(10), repeat=2):
        (degree_i, f), (degree_j, g) = forms[i], forms[j]
        quadratic_part = 0
        sextic_part = 0
        if degree_i == 2 and degree_j == 2:
            quadratic_part = action_scale * poisson_bracket(f, g)
        elif degree_i == 2:
            sextic_part = action_scale * poisson_bracket(f, g)
        elif degree_j == 2:
            sextic_part = -action_scale * poisson_bracket(g, f)
        else:
            quadratic_part = mu * normalised_transvectant(f, g, 5, 6, 6)
            sextic_part = nu * normalised_transvectant(f, g, 3, 6, 6)
        bracket[i, j] = binary_form_coordinates(quadratic_part, 2) + binary_form_coordinates(sextic_part, 6)

    operations = operation_set_from_name('ly')
    tables = {
        '[': field.to_working(field.array(bracket)),
        '(': field.working_zeros((10, 10, 10, 10)),
    }
    return StructureConstantAlgebra('so5-transvection', field, operations, tables)


def _so3_basis():
    return skew_basis(3)


def _traceless_symmetric_basis():
    matrices = [
        _unit_matrix(3, 0, 0) - _unit_matrix(3, 1, 1),
        _unit_matrix(3, 1, 1) - _unit_matrix(3, 2, 2),
    ]
    for i, j in itertools.combinations(range(3), 2):
        matrices.append(_unit_matrix(3, i, j) + _unit_matrix(3, j, i))
    return np.array(matrices, dtype=np.int64)


@functools.lru_cache(maxsize=None)
def tensor_pair():
    """
    so(9) = gl(V ⊗ V) ∩ skew, split as h = so3 ⊗ I ⊕ I ⊗ so3
    and m = (so3 ⊗ Sym0(3)) ⊕ (Sym0(3) ⊗ so3).
    """
    field = Q_SQRT2
    skews = _so3_basis()
    symmetrics = _traceless_symmetric_basis()
    identity = np.eye(3, dtype=np.int64)
    h = [np.kron(a, identity) for a in skews] + [np.kron(identity, a) for a in skews]
    m = [np.kron(a, s) for a in skews for s in symmetrics] + [np.kron(s, a) for s in symmetrics for a in skews]
    return ReductivePair(
        MatrixBasis(field, field.array(np.array(h, dtype=np.int64))),
        MatrixBasis(field, field.array(np.array(m, dtype=np.int64))),
    )


def build_LY4_tensor(field=Q_SQRT2):
    pair = _model_pair(tensor_pair(), field)
    binary, ternary = ly_tables(pair)
    return StructureConstantAlgebra('LY4-tensor', field, operation_set_from_name('ly'), {'[': binary, '(': ternary}, 4)


def _symmetric_matrix_basis(n, field):
    basis = MatrixBasis(Q_SQRT2, symmetric_basis(n))
    return basis if isinstance(field, QuadraticField) else basis.reduced(field)


def build_jordan_H(n, field=Q_SQRT2):
    """
    Symmetric n×n matrices with a∘b = ab + ba and {a, b, c} = abc + cba, on the orthonormal basis.
    """
    if n < 2:
        raise AlgebraException(f'matrix size n = {n} is too small (need n ≥ 2)')
    basis = _symmetric_matrix_basis(n, field)
    h = basis.working
    products = pairwise_products(field, h, h)
    binary = basis.coordinates(field.add(products, field.transpose(products, (1, 0, 2, 3))))
    return StructureConstantAlgebra(
        f'H{n}', field, operation_set_from_name('jordan'),
        {'[': binary, '(': symmetrised_triples(field, basis, h)}, n,
    )


def build_lie_triple_H(n, field=Q_SQRT2):
    """
    Symmetric n×n matrices as a Lie triple system: zero binary product, <a, b, c> = [[a, b], c].
    """
    if n < 2:
        raise AlgebraException(f'matrix size n = {n} is too small (need n ≥ 2)')
    basis = _symmetric_matrix_basis(n, field)
    h = basis.working
    triples = triple_coordinates(field, basis, h, h, h)
    # [[a, b], c] = abc - bac - cab + cba
    ternary = field.subtract(triples, field.transpose(triples, (1, 0, 2, 3)))
    ternary = field.subtract(ternary, field.transpose(triples, (1, 2, 0, 3)))
    ternary = field.add(ternary, field.transpose(triples, (2, 1, 0, 3)))
    dim = basis.dim
    return StructureConstantAlgebra(
        f'LTS-H{n}', field, operation_set_from_name('ly'),
        {'[': field.working_zeros((dim, dim, dim)), '(': ternary}, n,
    )


def build_skew_lie_jordan(n, field=Q_SQRT2):
    """
    so(n) with [x, y] = xy - yx and {x, y, z} = xyz + zyx, a special Lie-Jordan algebra.
    """
    if n < 2:
        raise AlgebraException(f'matrix size n = {n} is too small (need n ≥ 2)')
    basis = MatrixBasis(field, field.array(skew_basis(n)))
    k = basis.working
    binary = basis.coordinates(commutators(field, k, k))
    return StructureConstantAlgebra(
        f'so{n}', field, operation_set_from_name('ljy'),
        {'[': binary, '(': symmetrised_triples(field, basis, k)}, n,
    )


class Evaluator:
    """
    Evaluates monomials on an assignment of algebra elements, caching subtree values.

    An assignment entry of None makes that variable symbolic;
    the value of a subtree then carries one axis per symbolic variable it contains,
    in the order recorded alongside it, followed by the output axis.
    """
    def __init__(self, algebra, assignment):
        self.algebra = algebra
        self.field = algebra.field
        self.assignment = list(assignment)
        self._identity = self.field.working_from_ints(np.eye(algebra.dim, dtype=np.int64))
        self._value_from_tree = {}

    def value(self, tree):
        if tree in self._value_from_tree:
            return self._value_from_tree[tree]

        if isinstance(tree, int):
            vector = self.assignment[tree - 1]
            result = (self._identity, (tree,)) if vector is None else (vector, ())
        else:
            array = self.algebra.table(tree[0])
            variables = ()
            for child in tree[1:]:
                child_array, child_variables = self.value(child)
                array = self.field.tensordot(child_array, array, ([len(child_variables)], [len(variables)]))
                variables = child_variables + variables
            result = (array, variables)

        self._value_from_tree[tree] = result
        return result

    def evaluate(self, poly):
        symbolic = sorted(index + 1 for index, vector in enumerate(self.assignment) if vector is None)
        total = self.field.working_zeros((self.algebra.dim,) * (len(symbolic) + 1))
        for tree, coefficient in poly.terms.items():
            array, variables = self.value(tree)
            order = sorted(range(len(variables)), key=variables.__getitem__)
            if order != list(range(len(variables))):
                array = self.field.transpose(array, (*order, len(variables)))
            total = self.field.add(total, self.field.scale(array, coefficient))
        return total


def evaluate(algebra, poly, assignment):
    """
    Value of a polynomial (or monomial tree) at working vectors, one per variable.
    """
    if not isinstance(poly, MultilinearPoly):
        poly = MultilinearPoly(algebra.operations, Monomial.degree(poly), {poly: 1})
    if len(assignment) != poly.degree:
        raise AlgebraException(f'degree {poly.degree} polynomial given {len(assignment)} elements')
    for vector in assignment:
        if vector is not None and vector.shape != (algebra.dim,):
            raise AlgebraException(f'element of shape {vector.shape} in a {algebra.dim}-dimensional algebra')
    return Evaluator(algebra, assignment).evaluate(poly)


class AxiomResult:
    def __init__(self, name, passed, mode, checks, witness=None):
        self.name = name
        self.passed = passed
        self.mode = mode
        self.checks = checks
        self.witness = witness

    def to_json(self):
        return {
            'name': self.name,
            'passed': self.passed,
            'mode': self.mode,
            'checks': self.checks,
            'witness': self.witness,
        }

    def __str__(self):
        if self.passed:
            return f'{self.name}: holds ({self.mode}, {self.checks} checks)'
        return f'{self.name}: FAILS ({self.mode}); witness {self.witness}'


def _check_symmetry(algebra, axiom):
    field = algebra.field
    table = algebra.table(axiom.opening)
    axes = list(range(len(table.shape)))
    i, j = axiom.slots
    axes[i - 1], axes[j - 1] = axes[j - 1], axes[i - 1]
    difference = field.subtract(field.transpose(table, tuple(axes)), field.scale(table, axiom.sign))
    defects = np.argwhere(field.working_nonzero(difference))
    checks = int(np.prod(table.shape[:-1]))
    if len(defects):
        return AxiomResult(axiom.name, False, 'table', checks, {'basis_indices': [int(x) for x in defects[0][:-1]]})
    return AxiomResult(axiom.name, True, 'table', checks)


def _check_exhaustive(algebra, name, poly):
    field = algebra.field
    dim = algebra.dim
    degree = poly.degree
    fixed = 0
    while fixed < degree and dim ** (degree - fixed + 1) > EXHAUSTIVE_ENTRY_LIMIT:
        fixed += 1

    for indices in itertools.product(range(dim), repeat=fixed):
        assignment = [algebra.basis_vector(index) for index in indices] + [None] * (degree - fixed)
        value = Evaluator(algebra, assignment).evaluate(poly)
        defects = np.argwhere(field.working_nonzero(value))
        if len(defects):
            witness = [*indices, *(int(x) for x in defects[0][:-1])]
            return AxiomResult(name, False, 'exhaustive', dim ** degree, {'basis_indices': witness})

    return AxiomResult(name, True, 'exhaustive', dim ** degree)


def _check_random(algebra, name, poly, trials, seed):
    field = algebra.field
    rng = np.random.default_rng(seed)
    for trial in range(trials):
        assignment = [field.random_working(rng, algebra.dim) for _ in range(poly.degree)]
        value = Evaluator(algebra, assignment).evaluate(poly)
        if np.any(field.working_nonzero(value)):
            elements = [
                [field.entry_to_json(entry) for entry in field.from_working(vector)]
                for vector in assignment
            ]
            return AxiomResult(name, False, 'random', trial + 1, {'seed': seed, 'trial': trial, 'elements': elements})
    return AxiomResult(name, True, 'random', trials)


def verify_axioms(algebra, identities, mode='random', trials=10, seed=0):
    """
    Check identities on an algebra, one result per identity.

    `identities` holds catalog names, `SymmetryAxiom`s, `MultilinearPoly`s or (name, poly) pairs.
    Symmetry axioms are always checked on the whole table.
    """
    if mode not in ('exhaustive', 'random'):
        raise AlgebraException(f'unrecognised verification mode `{mode}` (expected `exhaustive` or `random`)')

    results = []
    for identity in identities:
        if isinstance(identity, str):
            name, axiom = identity, axiom_from_name(identity)
        elif isinstance(identity, tuple):
            name, axiom = identity
        else:
            name = getattr(identity, 'name', None) or str(identity)
            axiom = identity

        if isinstance(axiom, SymmetryAxiom):
            result = _check_symmetry(algebra, axiom)
        elif mode == 'exhaustive':
            result = _check_exhaustive(algebra, name, axiom)
        else:
            result = _check_random(algebra, name, axiom, trials, seed)

        logger.info('%s on %s: %s', name, algebra.name, 'holds' if result.passed else 'fails')
        results.append(result)
    return results


def detect_ternary_symmetry(algebra, opening='('):
    """
    The signed slot permutations leaving the ternary table invariant.

    Returns a sorted list of (permutation, sign), a permutation being the tuple of table axes.
    """
    field = algebra.field
    table = algebra.table(opening)
    found = []
    for permutation in itertools.permutations(range(3)):
        permuted = field.transpose(table, (*permutation, 3))
        for sign in (1, -1):
            if not np.any(field.working_nonzero(field.subtract(permuted, field.scale(table, sign)))):
                found.append((permutation, sign))
    return sorted(found)


def inner_derivation_dimension(algebra, opening='('):
    """
    Dimension of the span of the inner derivations d_{x,y} = <x, y, ->.
    """
    entries = algebra.table_entries(opening)
    dim = algebra.dim
    rows = entries.reshape(dim * dim, dim * dim)
    rank, _ = rref(ExactMatrix(algebra.field, rows))
    return rank


def left_multiplication(algebra, vector, opening='['):
    """
    The matrix of x -> a∘x acting on coordinate columns.
    """
    field = algebra.field
    partial = field.tensordot(vector, algebra.table(opening), ([0], [0]))
    return field.transpose(partial, (1, 0))


def jordan_inner_derivation(algebra, a, b):
    """
    d_{a,b} = [L_a, L_b] as a working matrix.
    """
    field = algebra.field
    left_a = left_multiplication(algebra, a)
    left_b = left_multiplication(algebra, b)
    return field.subtract(
        field.tensordot(left_a, left_b, ([1], [0])),
        field.tensordot(left_b, left_a, ([1], [0])),
    )


def is_derivation(algebra, matrix, opening):
    """
    Whether D(x_1 ... x_r) = sum_s x_1 ... D(x_s) ... x_r holds on all basis tuples.
    """
    field = algebra.field
    table = algebra.table(opening)
    arity = len(table.shape) - 1
    left = field.tensordot(table, matrix, ([arity], [1]))
    right = field.working_zeros(table.shape)
    for slot in range(arity):
        moved = field.tensordot(matrix, table, ([0], [slot]))
        axes = list(range(1, arity + 1))
        axes.insert(slot, 0)
        right = field.add(right, field.transpose(moved, tuple(axes)))
    return not np.any(field.working_nonzero(field.subtract(left, right)))
