"""
# Identity Forge: idfinder.py

Searches for the multilinear polynomial identities of an algebra.

Fill-and-reduce finds every identity of one degree (the nullspace of the evaluation matrix);
module generators sorts out which of them are consequences of known identities.

**Copyright 2024–2026 Conway**
Licensed under the GNU General Public License v3.0 (GPL-3.0-only).
This is free software with NO WARRANTY etc. etc., see LICENSE.
"""

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from idforge.algebras import Evaluator, verify_axioms
from idforge.exactfield import (
    EchelonForm, PrimeField, QuadraticField, ReconstructionException,
    rational_reconstruct,
)
from idforge.freeops import (
    MonomialBasis, MultilinearPoly, OperationSet,
    catalog_identity, liftings,
)
from idforge.utilities import integer_content, lcm_of


logger = logging.getLogger(__name__)

PERMUTATION_BLOCK_SIZE = 720


class SearchException(Exception):
    def __init__(self, message):
        self.message = message

    def __str__(self):
        return self.message


class SearchConfig:
    """
    Parameters of one identity search.
    """
    def __init__(self, prime=103, sqrt2=None, seed=0, stabilisation=10, degree=None, opset='mixed',
                 max_iterations=200, threads=None):
        if stabilisation < 1:
            raise SearchConfig.BadStabilisationException(stabilisation)
        if max_iterations < 1:
            raise SearchConfig.BadIterationCapException(max_iterations)
        if opset not in OperationSet.OPSETS:
            raise OperationSet.UnknownOpsetException(opset)
        if prime == 2:
            raise SearchConfig.EvenPrimeException()

        self.field = PrimeField(prime, sqrt2)
        if self.field.sqrt2 is None:
            raise PrimeField.NoSquareRootException(2, prime)
        self.prime = prime
        self.sqrt2 = self.field.sqrt2
        self.seed = seed
        self.stabilisation = stabilisation
        self.degree = degree
        self.opset = opset
        self.max_iterations = max_iterations
        self.threads = threads or default_threads()

    def with_degree(self, degree, opset=None):
        return SearchConfig(
            self.prime, self.sqrt2, self.seed, self.stabilisation, degree,
            opset or self.opset, self.max_iterations, self.threads,
        )

    def to_json(self):
        return {
            'prime': self.prime,
            'sqrt2': self.sqrt2,
            'seed': self.seed,
            'stabilisation': self.stabilisation,
            'degree': self.degree,
            'opset': self.opset,
            'max_iterations': self.max_iterations,
        }

    def __str__(self):
        return '\n'.join([
            f'SearchConfig(',
            f'  field={self.field.spec},',
            f'  seed={self.seed},',
            f'  stabilisation={self.stabilisation},',
            f'  degree={self.degree},',
            f'  opset={self.opset},',
            f'  max_iterations={self.max_iterations},',
            f')',
        ])

    class BadStabilisationException(SearchException):
        def __init__(self, stabilisation):
            super().__init__(f'stabilisation count must be at least 1 (got {stabilisation})')

    class BadIterationCapException(SearchException):
        def __init__(self, max_iterations):
            super().__init__(f'iteration cap must be at least 1 (got {max_iterations})')

    class EvenPrimeException(SearchException):
        def __init__(self):
            super().__init__('the search prime must be odd')


def default_threads():
    value = os.environ.get('IDFORGE_THREADS')
    if value:
        try:
            threads = int(value)
        except ValueError:
            raise SearchException(f'IDFORGE_THREADS must be a positive integer (got `{value}`)')
        if threads < 1:
            raise SearchException(f'IDFORGE_THREADS must be a positive integer (got `{value}`)')
        return threads
    return os.cpu_count() or 1


def search_algebra(algebra, field):
    """
    The algebra over the search field, reducing an exact algebra if need be.
    """
    if isinstance(algebra.field, QuadraticField):
        logger.info('reducing %s to %s for the search', algebra.name, field.spec)
        return algebra.reduce(field)
    if algebra.field != field:
        raise FillAndReduce.FieldMismatchException(algebra, field)
    return algebra


class FillResult:
    def __init__(self, rank, nullspace, iterations, rank_history, monomial_count):
        self.rank = rank
        self.nullspace = nullspace
        self.iterations = iterations
        self.rank_history = rank_history
        self.monomial_count = monomial_count


class FillAndReduce:
    """
    Fill-and-reduce over the degree-d monomials of an operation set.

    Each iteration evaluates all q monomials at d random elements,
    giving an m×q block of coordinates below the current q×q RREF block;
    the matrix is reduced again and the loop stops once the rank
    has not changed for `stabilisation` consecutive iterations.
    """
    def __init__(self, algebra, config, operations=None):
        if config.degree is None or config.degree < 1:
            raise SearchException('a fill-and-reduce search needs a positive degree')

        self.config = config
        self.field = config.field
        self.algebra = search_algebra(algebra, self.field)
        self.operations = (operations or self.algebra.operations).restrict(config.opset)
        self.basis = MonomialBasis(self.operations, config.degree)

    def _evaluate_columns(self, vectors, columns):
        evaluator = Evaluator(self.algebra, vectors)
        block = np.empty((self.algebra.dim, len(columns)), dtype=np.int64)
        for position, column in enumerate(columns):
            value, _ = evaluator.value(self.basis.monomials[column])
            block[:, position] = value
        return block

    def evaluation_block(self, vectors):
        """
        The m×q block of coordinates of every monomial at the given elements.
        """
        q = self.basis.size
        threads = max(1, min(self.config.threads, q))
        if threads == 1:
            return self._evaluate_columns(vectors, range(q))

        chunks = np.array_split(np.arange(q), threads)
        with ThreadPoolExecutor(max_workers=threads) as executor:
            blocks = list(executor.map(lambda chunk: self._evaluate_columns(vectors, chunk), chunks))
        return np.concatenate(blocks, axis=1)

    def run(self):
        config = self.config
        field = self.field
        q = self.basis.size
        rng = np.random.default_rng(config.seed)
        echelon = EchelonForm(field, q)

        rank_history = []
        unchanged = 0
        iterations = 0
        while unchanged < config.stabilisation:
            if iterations == config.max_iterations:
                raise FillAndReduce.NoStabilisationException(config.max_iterations, echelon.rank)
            iterations += 1

            vectors = [field.random_working(rng, self.algebra.dim) for _ in range(config.degree)]
            started = time.perf_counter()
            block = self.evaluation_block(vectors)
            logger.debug('evaluated %d monomials in %.3fs', q, time.perf_counter() - started)

            gained = echelon.absorb(block) if q else 0
            rank_history.append(echelon.rank)
            unchanged = 0 if gained else unchanged + 1
            logger.info('iteration %d: rank %d', iterations, echelon.rank)

            if echelon.rank == q:
                break

        nullspace = [
            MultilinearPoly.from_vector(self.basis, vector, field.modulus, self.algebra.operations)
            for vector in echelon.nullspace_basis()
        ]
        return FillResult(echelon.rank, nullspace, iterations, rank_history, q)

    class FieldMismatchException(SearchException):
        def __init__(self, algebra, field):
            super().__init__(
                f'algebra `{algebra.name}` is over {algebra.field.spec} but the search is over {field.spec}'
            )

    class NoStabilisationException(SearchException):
        def __init__(self, max_iterations, rank):
            super().__init__(
                f'rank (last {rank}) did not stabilise within {max_iterations} iterations'
            )


def fill_and_reduce(algebra, config, operations=None):
    """
    Rank of the evaluation matrix and the nullspace basis as polynomials.
    """
    result = FillAndReduce(algebra, config, operations).run()
    return result.rank, result.nullspace


class ModuleSpan:
    """
    The S_d-submodule spanned by some degree-d polynomials, kept as an RREF over the full monomial basis.

    Absorbing a polynomial adds all d! of its permuted images.
    """
    def __init__(self, operations, degree, field):
        self.operations = operations
        self.degree = degree
        self.field = field
        self.basis = MonomialBasis(operations, degree)
        self.echelon = EchelonForm(field, self.basis.size)

    @property
    def rank(self):
        return self.echelon.rank

    def vector(self, poly):
        if poly.degree != self.degree:
            raise SearchException(f'degree {poly.degree} polynomial given to a degree {self.degree} module')
        return poly.to_vector(self.basis, self.field)

    def contains(self, poly):
        """
        Whether the polynomial lies in the span (and so does its whole orbit).
        """
        return self.echelon.contains(self.vector(poly))

    def absorb(self, poly):
        vector = self.vector(poly)
        if self.echelon.contains(vector):
            return 0

        gained = 0
        permutation_count = len(self.basis.permutations)
        for start in range(0, permutation_count, PERMUTATION_BLOCK_SIZE):
            indices = np.arange(start, min(start + PERMUTATION_BLOCK_SIZE, permutation_count))
            gained += self.echelon.absorb(self.basis.orbit_rows(vector, self.field, indices))
        return gained


def module_generators(candidates, degree, operations, field, seed_module=None, span=None):
    """
    Greedy generators: a candidate is recorded iff its orbit raises the rank of the module.

    Returns (generators, final rank, span).
    """
    if span is None:
        span = ModuleSpan(operations, degree, field)
    for poly in seed_module or []:
        span.absorb(poly)

    generators = []
    for poly in candidates:
        gained = span.absorb(poly)
        if gained:
            generators.append(poly)
            logger.info('generator %d raises the module to dimension %d', len(generators), span.rank)
    return generators, span.rank, span


def lifted_candidates(known, degree):
    """
    Liftings to the target degree of every known identity of lower degree.
    """
    candidates = []
    for known_degree in sorted(known):
        if known_degree >= degree:
            continue
        for poly in known[known_degree]:
            candidates.extend(liftings(poly, degree))
    return candidates


def lifted_module(known, degree, operations, field):
    """
    The module of consequences in one degree of the known identities.

    Known identities of the target degree itself are absorbed whole;
    lower-degree ones contribute their liftings.
    Returns (generators, dimension, span).
    """
    seed_module = list(known.get(degree, []))
    candidates = lifted_candidates(known, degree)
    generators, dimension, span = module_generators(candidates, degree, operations, field, seed_module)
    logger.info('lifted module in degree %d: dimension %d from %d liftings', degree, dimension, len(candidates))
    return generators, dimension, span


def module_membership(poly, module_polys, field, operations=None):
    """
    Whether a polynomial lies in the S_d-module generated by some others.
    """
    operations = operations or poly.operations
    span = ModuleSpan(operations, poly.degree, field)
    for member in module_polys:
        span.absorb(member)
    return span.contains(poly)


def reconstruct_identity(poly, modulus=None):
    """
    Integer polynomial from a modular one:
    coefficients are reconstructed as rationals, cleared of denominators and divided by their content.
    """
    modulus = modulus or poly.modulus
    if modulus is None:
        raise SearchException('reconstruction needs a modular polynomial')
    if poly.is_zero():
        return MultilinearPoly.zero(poly.operations, poly.degree)

    rationals = {tree: rational_reconstruct(int(coefficient), modulus) for tree, coefficient in poly.terms.items()}
    multiple = lcm_of(value.denominator for value in rationals.values())
    integers = {tree: int(value * multiple) for tree, value in rationals.items()}
    content = integer_content(integers.values())
    return MultilinearPoly(poly.operations, poly.degree, {tree: value // content for tree, value in integers.items()})


def verify_char0(poly, algebra, trials=10, seed=0, name=None):
    """
    Evaluate an integer polynomial on seeded random elements of an exact algebra.
    """
    if not isinstance(algebra.field, QuadraticField):
        raise SearchException(f'characteristic-zero verification needs an exact algebra, not {algebra.field.spec}')
    return verify_axioms(algebra, [(name or poly.render(), poly)], mode='random', trials=trials, seed=seed)[0]


class IdentityReport:
    def __init__(self, algebra_name, degree, opset, config, monomial_count, rank, iterations, rank_history,
                 nullspace, lifted_dimension, lifted_generator_count, generators, reconstructed,
                 module_dimensions, verification, timings):
        self.algebra_name = algebra_name
        self.degree = degree
        self.opset = opset
        self.config = config
        self.monomial_count = monomial_count
        self.rank = rank
        self.iterations = iterations
        self.rank_history = rank_history
        self.nullspace = nullspace
        self.lifted_dimension = lifted_dimension
        self.lifted_generator_count = lifted_generator_count
        self.generators = generators
        self.reconstructed = reconstructed
        self.module_dimensions = module_dimensions
        self.verification = verification
        self.timings = timings

    @property
    def nullspace_dimension(self):
        return self.monomial_count - self.rank

    @property
    def new_generator_count(self):
        return len(self.generators)

    @property
    def module_dimension(self):
        if self.module_dimensions:
            return self.module_dimensions[-1]
        return self.lifted_dimension

    @property
    def reconstruction_failures(self):
        return sum(poly is None for poly in self.reconstructed)

    @property
    def verification_failures(self):
        return sum(not result['passed'] for result in self.verification)

    def to_json(self):
        return {
            'algebra': self.algebra_name,
            'degree': self.degree,
            'opset': self.opset,
            'config': self.config,
            'monomial_count': self.monomial_count,
            'rank': self.rank,
            'nullspace_dimension': self.nullspace_dimension,
            'iterations': self.iterations,
            'rank_history': self.rank_history,
            'nullspace': [poly.to_json() for poly in self.nullspace],
            'lifted_dimension': self.lifted_dimension,
            'lifted_generator_count': self.lifted_generator_count,
            'generators': [poly.to_json() for poly in self.generators],
            'reconstructed': [None if poly is None else poly.to_json() for poly in self.reconstructed],
            'module_dimensions': self.module_dimensions,
            'verification': self.verification,
            'timings': self.timings,
        }

    @staticmethod
    def from_json(document):
        return IdentityReport(
            document['algebra'], document['degree'], document['opset'], document['config'],
            document['monomial_count'], document['rank'], document['iterations'], document['rank_history'],
            [MultilinearPoly.from_json(poly) for poly in document['nullspace']],
            document['lifted_dimension'], document['lifted_generator_count'],
            [MultilinearPoly.from_json(poly) for poly in document['generators']],
            [None if poly is None else MultilinearPoly.from_json(poly) for poly in document['reconstructed']],
            document['module_dimensions'], document['verification'], document['timings'],
        )

    def render(self):
        lines = [
            f'{self.algebra_name}, degree {self.degree}, {self.opset} operations '
            f'(GF({self.config["prime"]}), seed {self.config["seed"]}):',
            f'  {self.monomial_count} normal monomials;'
            f' rank reaches {self.rank} after {self.iterations} iterations;'
            f' nullspace dimension {self.nullspace_dimension}.',
            f'  Lifted module dimension {self.lifted_dimension}'
            f' ({self.lifted_generator_count} generators).',
            f'  {self.new_generator_count} new generator{"" if self.new_generator_count == 1 else "s"}'
            + (f'; module dimensions {", ".join(str(d) for d in self.module_dimensions)}.' if self.module_dimensions else '.'),
        ]
        for index, (generator, reconstructed) in enumerate(zip(self.generators, self.reconstructed), start=1):
            if reconstructed is None:
                lines.append(f'  [{index}] (reconstruction failed; modular form) {generator.render()}')
            else:
                lines.append(
                    f'  [{index}] {reconstructed.term_count} terms,'
                    f' squared length {reconstructed.squared_length()}: {reconstructed.render()}'
                )
        for result in self.verification:
            status = 'holds' if result['passed'] else 'FAILS'
            lines.append(f'  char-0 check of {result["name"]}: {status} ({result["checks"]} trials)')
        return '\n'.join(lines)

    def __str__(self):
        return self.render()


def _reconstructed_or_none(poly):
    try:
        return reconstruct_identity(poly)
    except ReconstructionException as exception:
        logger.info('reconstruction failed: %s', exception)
        return None


def _length_key(item):
    index, (_, reconstructed) = item
    if reconstructed is None:
        return (1, 0, index)
    return (0, reconstructed.squared_length(), index)


def new_identities(algebra, degree, opset, config, known=None, exact_algebra=None, trials=10):
    """
    Identities of one degree that do not follow from the known ones.

    The nullspace basis is reconstructed over the integers and scanned by increasing squared length,
    each polynomial whose orbit enlarges the lifted module being a new generator.
    Generators are checked in characteristic 0 when an exact algebra is given.
    """
    known = known or {}
    config = config.with_degree(degree, opset)
    timings = {}

    started = time.perf_counter()
    search = FillAndReduce(algebra, config)
    fill = search.run()
    timings['fill'] = time.perf_counter() - started
    logger.info(
        'degree %d %s: rank %d of %d after %d iterations',
        degree, opset, fill.rank, fill.monomial_count, fill.iterations,
    )

    operations = search.algebra.operations
    started = time.perf_counter()
    lifted_generators, lifted_dimension, span = lifted_module(known, degree, operations, config.field)
    timings['lifted'] = time.perf_counter() - started

    started = time.perf_counter()
    nullspace_dimension = fill.monomial_count - fill.rank
    if opset == 'mixed' and lifted_dimension > nullspace_dimension:
        logger.warning(
            'lifted module (%d) exceeds the nullspace (%d); the algebra fails a known identity',
            lifted_dimension, nullspace_dimension,
        )

    candidates = [(poly, _reconstructed_or_none(poly)) for poly in fill.nullspace]
    ordered = [pair for _, pair in sorted(enumerate(candidates), key=_length_key)]

    generators = []
    reconstructed = []
    module_dimensions = []
    if not (opset == 'mixed' and lifted_dimension == nullspace_dimension):
        for poly, integer_poly in ordered:
            if span.absorb(poly):
                generators.append(poly)
                reconstructed.append(integer_poly)
                module_dimensions.append(span.rank)
                logger.info('new generator in degree %d: module dimension %d', degree, span.rank)
    timings['generators'] = time.perf_counter() - started

    started = time.perf_counter()
    verification = []
    if exact_algebra is not None:
        for index, integer_poly in enumerate(reconstructed, start=1):
            if integer_poly is None:
                continue
            result = verify_char0(integer_poly, exact_algebra, trials, config.seed, name=f'generator {index}')
            verification.append(result.to_json())
            if not result.passed:
                logger.warning('generator %d fails in characteristic 0 (a modular artefact)', index)
    timings['verification'] = time.perf_counter() - started

    return IdentityReport(
        search.algebra.name, degree, opset, config.to_json(), fill.monomial_count, fill.rank,
        fill.iterations, fill.rank_history, fill.nullspace, lifted_dimension, len(lifted_generators),
        generators, reconstructed, module_dimensions, verification, timings,
    )


def search_chain(algebra, degrees, opsets, config, known=None, exact_algebra=None):
    """
    Searches degree by degree (each degree through the given operation sets in order),
    carrying every new generator forward as a known identity of its degree.
    """
    known = {degree: list(polys) for degree, polys in (known or {}).items()}
    reports = []
    for degree in degrees:
        for opset in opsets:
            report = new_identities(algebra, degree, opset, config, known, exact_algebra)
            reports.append(report)
            for generator, integer_poly in zip(report.generators, report.reconstructed):
                carried = generator if integer_poly is None else integer_poly
                known.setdefault(degree, []).append(carried)
    return reports


def default_known(operations_name, degree):
    """
    Catalog identities of degree below `degree` for an operation set (LY3 to LY6 for `ly`).
    """
    known = {}
    if operations_name == 'ly':
        for name in ('LY3', 'LY4', 'LY5', 'LY6'):
            poly = catalog_identity(name)
            if poly.degree < degree:
                known.setdefault(poly.degree, []).append(poly)
    return known