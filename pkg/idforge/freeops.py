"""
# Identity Forge: freeops.py

Free nonassociative polynomials in a binary and a ternary operation.

A __monomial__ is a nested tuple tree:
a leaf is a 1-based variable index,
and a node is (opening bracket, child, ..., child).
For example [[a, b], c] is ('[', ('[', 1, 2), 3).

**Copyright 2024–2026 Conway**
Licensed under the GNU General Public License v3.0 (GPL-3.0-only).
This is free software with NO WARRANTY etc. etc., see LICENSE.
"""

import itertools
import logging
import re
from fractions import Fraction

import numpy as np

from idforge.exactfield import mod_inverse
from idforge.utilities import compositions, letter_from_variable, shuffles


logger = logging.getLogger(__name__)

CLOSING_FROM_OPENING = {'[': ']', '(': ')', '{': '}', '<': '>', '⟨': '⟩'}
LEAF_PATTERN = '-'
COEFFICIENT_PATTERN = re.compile(r'([0-9]+(?:/[0-9]+)?)\s*\*?')


class FreeOpsException(Exception):
    def __init__(self, message):
        self.message = message

    def __str__(self):
        return self.message


class OperationSignature:
    """
    An operation of some arity, with slot symmetries.

    Each symmetry (i, j, sign) says that swapping slots i and j (1-based)
    multiplies a monomial by `sign`.
    """
    def __init__(self, name, arity, symmetries, brackets, display=None, aliases=()):
        self.name = name
        self.arity = arity
        self.symmetries = tuple(symmetries)
        self.brackets = brackets
        self.display = display or brackets
        self.aliases = tuple(aliases)
        self._slot_group = None
        self._vanishes = None

    @property
    def opening(self):
        return self.brackets[0]

    def slot_group(self):
        """
        Closure of the symmetry swaps, as a list of (arrangement, sign).

        An arrangement is a tuple whose sth entry is the slot whose child moves into slot s.
        """
        if self._slot_group is None:
            self._compute_slot_group()
        return self._slot_group

    @property
    def vanishes(self):
        if self._slot_group is None:
            self._compute_slot_group()
        return self._vanishes

    def _compute_slot_group(self):
        identity = tuple(range(self.arity))
        sign_from_arrangement = {identity: 1}
        frontier = [identity]
        vanishes = False
        while frontier:
            arrangement = frontier.pop()
            for i, j, swap_sign in self.symmetries:
                swapped = list(arrangement)
                swapped[i - 1], swapped[j - 1] = swapped[j - 1], swapped[i - 1]
                swapped = tuple(swapped)
                sign = sign_from_arrangement[arrangement] * swap_sign
                if swapped not in sign_from_arrangement:
                    sign_from_arrangement[swapped] = sign
                    frontier.append(swapped)
                elif sign_from_arrangement[swapped] != sign:
                    vanishes = True

        self._slot_group = sorted(sign_from_arrangement.items())
        self._vanishes = vanishes

    def identity(self):
        return self.name, self.arity, self.symmetries, self.brackets

    def __eq__(self, other):
        return isinstance(other, OperationSignature) and self.identity() == other.identity()

    def __hash__(self):
        return hash(self.identity())

    def __str__(self):
        symmetries = ', '.join(
            f'{"skew" if sign < 0 else "sym"}({i},{j})'
            for i, j, sign in self.symmetries
        )
        return f'{self.name}/{self.arity} {self.display} {symmetries}'.rstrip()


class AssociationType:
    """
    A canonical placement of operation symbols over blank leaves.
    """
    def __init__(self, pattern, degree, index, tree):
        self.pattern = pattern
        self.degree = degree
        self.index = index
        self.tree = tree

    def __str__(self):
        return self.pattern


class Monomial:
    """
    Static class for manipulating monomial trees.
    """

    @staticmethod
    def is_leaf(tree):
        return isinstance(tree, int)

    @staticmethod
    def leaves(tree):
        if isinstance(tree, int):
            return (tree,)
        return tuple(leaf for child in tree[1:] for leaf in Monomial.leaves(child))

    @staticmethod
    def degree(tree):
        if isinstance(tree, int):
            return 1
        return sum(Monomial.degree(child) for child in tree[1:])

    @staticmethod
    def pattern(tree):
        if isinstance(tree, int):
            return LEAF_PATTERN
        opening = tree[0]
        return opening + ''.join(Monomial.pattern(child) for child in tree[1:]) + CLOSING_FROM_OPENING[opening]

    @staticmethod
    def fill(tree, leaves):
        """
        Replace the leaves of a tree, in preorder, by a sequence of variables.
        """
        iterator = iter(leaves)

        def filled(node):
            if isinstance(node, int):
                return next(iterator)
            return (node[0], *(filled(child) for child in node[1:]))

        return filled(tree)

    @staticmethod
    def from_pattern(pattern, leaves):
        stack = [[]]
        for character in pattern:
            if character == LEAF_PATTERN:
                stack[-1].append(0)
            elif character in CLOSING_FROM_OPENING:
                stack.append([character])
            else:
                node = tuple(stack.pop())
                stack[-1].append(node)
        if len(stack) != 1 or len(stack[0]) != 1:
            raise FreeOpsException(f'malformed association pattern `{pattern}`')
        return Monomial.fill(stack[0][0], leaves)

    @staticmethod
    def relabel(tree, images):
        """
        Send each variable v to images[v - 1].
        """
        if isinstance(tree, int):
            return images[tree - 1]
        return (tree[0], *(Monomial.relabel(child, images) for child in tree[1:]))

    @staticmethod
    def substitute(tree, variable, replacement):
        if isinstance(tree, int):
            return replacement if tree == variable else tree
        return (tree[0], *(Monomial.substitute(child, variable, replacement) for child in tree[1:]))

    @staticmethod
    def render(tree, display_from_opening):
        if isinstance(tree, int):
            return letter_from_variable(tree)
        display = display_from_opening.get(tree[0], tree[0] + CLOSING_FROM_OPENING[tree[0]])
        children = ','.join(Monomial.render(child, display_from_opening) for child in tree[1:])
        return f'{display[0]}{children}{display[1]}'


class OperationSet:
    """
    An ordered collection of operation signatures (binary before ternary),
    with canonical forms, association types and monomial bases.
    """
    OPSETS = ('binary', 'ternary', 'mixed')

    def __init__(self, name, signatures):
        self.name = name
        self.signatures = tuple(signatures)
        self.signature_from_opening = {signature.opening: signature for signature in self.signatures}
        self.key_from_opening = {}
        for signature in self.signatures:
            for brackets in (signature.brackets, signature.display, *signature.aliases):
                self.key_from_opening.setdefault(brackets[0], signature.opening)
        self.display_from_opening = {signature.opening: signature.display for signature in self.signatures}

        self._types_from_degree = {}
        self._type_key_from_pattern = {LEAF_PATTERN: (-1, 0)}
        self._basis_from_degree = {}
        self._restriction_from_opset = {}

    def signature_of_arity(self, arity):
        for signature in self.signatures:
            if signature.arity == arity:
                return signature
        return None

    def restrict(self, opset):
        """
        Sub-collection of binary-only, ternary-only, or all (mixed) operations.
        """
        if opset == 'mixed':
            return self
        if opset not in OperationSet.OPSETS:
            raise OperationSet.UnknownOpsetException(opset)
        if opset not in self._restriction_from_opset:
            arity = 2 if opset == 'binary' else 3
            signatures = [signature for signature in self.signatures if signature.arity == arity]
            if not signatures:
                raise OperationSet.UnknownOpsetException(opset)
            self._restriction_from_opset[opset] = OperationSet(f'{self.name}/{opset}', signatures)
        return self._restriction_from_opset[opset]

    def types(self, degree):
        """
        Association types of a degree.

        Ordered by operation (binary first), then by composition of the degree
        (descending lexicographical), then by child type ranks (ascending product order).
        A type is kept only if no slot-group arrangement has a smaller key tuple,
        the key of a child being (-degree, rank).
        """
        if degree in self._types_from_degree:
            return self._types_from_degree[degree]

        if degree == 1:
            types = [AssociationType(LEAF_PATTERN, 1, 0, 0)]
            self._types_from_degree[degree] = types
            return types

        found = []
        for signature in self.signatures:
            if signature.vanishes or degree < signature.arity:
                continue
            closing = CLOSING_FROM_OPENING[signature.opening]
            for composition in compositions(degree, signature.arity):
                child_type_lists = [self.types(part) for part in composition]
                for children in itertools.product(*child_type_lists):
                    keys = tuple(self._type_key_from_pattern[child.pattern] for child in children)
                    if any(
                        tuple(keys[slot] for slot in arrangement) < keys
                        for arrangement, _ in signature.slot_group()
                    ):
                        continue
                    pattern = signature.opening + ''.join(child.pattern for child in children) + closing
                    tree = (signature.opening, *(child.tree for child in children))
                    found.append((pattern, tree))

        types = []
        for rank, (pattern, tree) in enumerate(found):
            types.append(AssociationType(pattern, degree, rank, tree))
            self._type_key_from_pattern[pattern] = (-degree, rank)
        self._types_from_degree[degree] = types
        return types

    def type_key(self, pattern):
        if pattern not in self._type_key_from_pattern:
            self.types(pattern.count(LEAF_PATTERN))
        try:
            return self._type_key_from_pattern[pattern]
        except KeyError:
            raise OperationSet.UnknownTypeException(pattern, self.name)

    def canonicalize(self, tree):
        """
        Canonical form of a monomial, as (tree, sign) with monomial = sign * tree.

        Returns (None, 0) for a monomial that vanishes by the slot symmetries.
        """
        canonical = self._canonical(tree)
        if canonical is None:
            return None, 0
        return canonical[0], canonical[1]

    def _canonical(self, tree):
        if isinstance(tree, int):
            return tree, 1, LEAF_PATTERN, tree

        try:
            signature = self.signature_from_opening[tree[0]]
        except KeyError:
            raise OperationSet.UnknownOperationException(tree[0], self.name)
        if len(tree) - 1 != signature.arity:
            raise OperationSet.BadArityException(tree[0], len(tree) - 1, signature.arity)
        if signature.vanishes:
            return None

        sign = 1
        infos = []
        for child in tree[1:]:
            info = self._canonical(child)
            if info is None:
                return None
            sign *= info[1]
            infos.append(info)

        type_keys = [self.type_key(info[2]) for info in infos]
        variable_keys = [info[3] for info in infos]

        best_key = None
        best_arrangement = None
        best_sign = None
        for arrangement, arrangement_sign in signature.slot_group():
            key = (
                tuple(type_keys[slot] for slot in arrangement),
                tuple(variable_keys[slot] for slot in arrangement),
            )
            if best_key is None or key < best_key:
                best_key, best_arrangement, best_sign = key, arrangement, arrangement_sign
            elif key == best_key and arrangement_sign != best_sign:
                arranged = [infos[slot][0] for slot in arrangement]
                if arranged == [infos[slot][0] for slot in best_arrangement]:
                    return None

        children = [infos[slot] for slot in best_arrangement]
        closing = CLOSING_FROM_OPENING[tree[0]]
        return (
            (tree[0], *(child[0] for child in children)),
            sign * best_sign,
            tree[0] + ''.join(child[2] for child in children) + closing,
            min(variable_keys),
        )

    def basis(self, degree):
        if degree not in self._basis_from_degree:
            self._basis_from_degree[degree] = MonomialBasis(self, degree)
        return self._basis_from_degree[degree]

    def sort_key(self, tree):
        return self.type_key(Monomial.pattern(tree)), Monomial.leaves(tree)

    def __str__(self):
        return f'{self.name}: ' + '; '.join(str(signature) for signature in self.signatures)

    class UnknownOpsetException(FreeOpsException):
        def __init__(self, opset):
            super().__init__(f'unrecognised operation subset `{opset}` (expected one of {", ".join(OperationSet.OPSETS)})')

    class UnknownOperationException(FreeOpsException):
        def __init__(self, opening, name):
            super().__init__(f'bracket `{opening}` existeth not in operation set `{name}`')

    class BadArityException(FreeOpsException):
        def __init__(self, opening, given, arity):
            super().__init__(f'bracket `{opening}` given {given} arguments but hath arity {arity}')

    class UnknownTypeException(FreeOpsException):
        def __init__(self, pattern, name):
            super().__init__(f'pattern `{pattern}` is not a canonical association type for `{name}`')


class MonomialBasis:
    """
    The ordered normal monomials of one degree, which label vector columns.

    Within each association type, monomials are ordered lexicographically by leaf sequence.
    """
    def __init__(self, operations, degree):
        self.operations = operations
        self.degree = degree
        self.types = operations.types(degree)

        permutations = list(itertools.permutations(range(1, degree + 1)))
        self.permutations = np.array(permutations, dtype=np.int64).reshape(len(permutations), degree)
        self._code_weights = (degree + 1) ** np.arange(degree - 1, -1, -1, dtype=np.int64)
        self._rank_from_code = np.full((degree + 1) ** degree, -1, dtype=np.int64)
        self._rank_from_code[self.permutations @ self._code_weights] = np.arange(len(permutations))

        type_count = len(self.types)
        self._lookup_column = np.full((type_count, len(permutations)), -1, dtype=np.int64)
        self._lookup_sign = np.zeros((type_count, len(permutations)), dtype=np.int64)

        self.monomials = []
        self.column_from_monomial = {}
        type_indices = []
        leaf_rows = []
        for association_type in self.types:
            found = {}
            images = []
            for leaves in permutations:
                canonical, sign = operations.canonicalize(Monomial.fill(association_type.tree, leaves))
                images.append((canonical, sign))
                if sign:
                    found[canonical] = Monomial.leaves(canonical)
            ordered = sorted(found, key=found.get)
            for canonical in ordered:
                self.column_from_monomial[canonical] = len(self.monomials)
                self.monomials.append(canonical)
                type_indices.append(association_type.index)
                leaf_rows.append(found[canonical])

            for rank, (canonical, sign) in enumerate(images):
                if sign:
                    self._lookup_column[association_type.index, rank] = self.column_from_monomial[canonical]
                    self._lookup_sign[association_type.index, rank] = sign

        self.type_indices = np.array(type_indices, dtype=np.int64)
        self.leaf_rows = np.array(leaf_rows, dtype=np.int64).reshape(len(leaf_rows), degree)
        self._action = None

        logger.debug(
            'basis %s degree %d: %d types, %d monomials',
            operations.name, degree, len(self.types), len(self.monomials),
        )

    @property
    def size(self):
        return len(self.monomials)

    def locate(self, tree):
        """
        Column and sign of a monomial, or (None, 0) if it vanishes.
        """
        canonical, sign = self.operations.canonicalize(tree)
        if sign == 0:
            return None, 0
        try:
            return self.column_from_monomial[canonical], sign
        except KeyError:
            raise MonomialBasis.ForeignMonomialException(canonical, self)

    def action_table(self):
        """
        Images of every basis monomial under every permutation of the variables.

        Returns (targets, signs), both of shape (d!, q):
        permutation k sends monomial j to signs[k, j] times monomial targets[k, j].
        """
        if self._action is None:
            permutation_count = len(self.permutations)
            targets = np.empty((permutation_count, self.size), dtype=np.int64)
            signs = np.empty((permutation_count, self.size), dtype=np.int64)
            for column in range(self.size):
                images = self.permutations[:, self.leaf_rows[column] - 1]
                ranks = self._rank_from_code[images @ self._code_weights]
                targets[:, column] = self._lookup_column[self.type_indices[column], ranks]
                signs[:, column] = self._lookup_sign[self.type_indices[column], ranks]
            self._action = targets, signs
        return self._action

    def orbit_rows(self, vector, field, permutation_indices=None):
        """
        The images of a coefficient vector under permutations of the variables, as rows.
        """
        targets, signs = self.action_table()
        if permutation_indices is not None:
            targets = targets[permutation_indices]
            signs = signs[permutation_indices]
        rows = field.zeros(targets.shape)
        rows[np.arange(targets.shape[0])[:, None], targets] = signs * vector[None, :]
        return field.normalise(rows)

    def permutation_index(self, images):
        code = np.array(images, dtype=np.int64) @ self._code_weights
        return int(self._rank_from_code[code])

    class ForeignMonomialException(FreeOpsException):
        def __init__(self, tree, basis):
            super().__init__(
                f'monomial `{Monomial.pattern(tree)}` existeth not in the degree-{basis.degree} '
                f'basis of `{basis.operations.name}`'
            )


class MultilinearPoly:
    """
    A linear combination of canonical monomials of one degree.

    Coefficients are exact rationals (`int` or `Fraction`),
    or residues modulo `modulus` when one is set.
    """
    def __init__(self, operations, degree, terms=None, modulus=None):
        self.operations = operations
        self.degree = degree
        self.modulus = modulus
        self.terms = {}
        for tree, coefficient in (terms or {}).items():
            coefficient = self._normalise(coefficient)
            if coefficient:
                self.terms[tree] = coefficient

    def _normalise(self, coefficient):
        if self.modulus is not None:
            if isinstance(coefficient, Fraction):
                return coefficient.numerator * mod_inverse(coefficient.denominator, self.modulus) % self.modulus
            return int(coefficient) % self.modulus
        if isinstance(coefficient, Fraction) and coefficient.denominator == 1:
            return coefficient.numerator
        if isinstance(coefficient, np.integer):
            return int(coefficient)
        return coefficient

    @staticmethod
    def from_terms(operations, degree, pairs, modulus=None):
        """
        Build from (coefficient, tree) pairs, canonicalising and collecting like terms.
        """
        collected = {}
        for coefficient, tree in pairs:
            canonical, sign = operations.canonicalize(tree)
            if sign == 0:
                continue
            collected[canonical] = collected.get(canonical, 0) + sign * coefficient
        return MultilinearPoly(operations, degree, collected, modulus)

    @staticmethod
    def zero(operations, degree, modulus=None):
        return MultilinearPoly(operations, degree, {}, modulus)

    def is_zero(self):
        return not self.terms

    @property
    def term_count(self):
        return len(self.terms)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda item: self.operations.sort_key(item[0]))

    def _check_compatible(self, other):
        if self.degree != other.degree or self.modulus != other.modulus:
            raise FreeOpsException(
                f'cannot combine degree {self.degree} (modulus {self.modulus}) '
                f'with degree {other.degree} (modulus {other.modulus})'
            )

    def __add__(self, other):
        self._check_compatible(other)
        terms = dict(self.terms)
        for tree, coefficient in other.terms.items():
            terms[tree] = terms.get(tree, 0) + coefficient
        return MultilinearPoly(self.operations, self.degree, terms, self.modulus)

    def __neg__(self):
        return self.scaled(-1)

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, factor):
        return MultilinearPoly(
            self.operations, self.degree,
            {tree: coefficient * factor for tree, coefficient in self.terms.items()},
            self.modulus,
        )

    def __eq__(self, other):
        return (
            isinstance(other, MultilinearPoly)
            and self.degree == other.degree
            and self.modulus == other.modulus
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.degree, self.modulus, frozenset(self.terms.items())))

    def relabelled(self, images):
        """
        Apply the variable permutation v -> images[v - 1].
        """
        return MultilinearPoly.from_terms(
            self.operations, self.degree,
            [(coefficient, Monomial.relabel(tree, images)) for tree, coefficient in self.terms.items()],
            self.modulus,
        )

    def map_trees(self, function, degree, operations=None):
        operations = operations or self.operations
        return MultilinearPoly.from_terms(
            operations, degree,
            [(coefficient, function(tree)) for tree, coefficient in self.terms.items()],
            self.modulus,
        )

    def with_operations(self, operations):
        return self.map_trees(lambda tree: tree, self.degree, operations)

    def reduced(self, modulus):
        return MultilinearPoly(self.operations, self.degree, self.terms, modulus)

    def to_vector(self, basis, field):
        vector = field.zeros(basis.size)
        for tree, coefficient in self.terms.items():
            column, sign = basis.locate(tree)
            if sign:
                vector[column] = vector[column] + field.from_exact(sign * coefficient)
        return field.normalise(vector)

    @staticmethod
    def from_vector(basis, vector, modulus=None, operations=None):
        terms = {}
        for column in np.flatnonzero(np.asarray(vector, dtype=object).astype(bool)):
            entry = vector[column]
            if modulus is not None:
                entry = int(entry)
            terms[basis.monomials[column]] = entry
        return MultilinearPoly(operations or basis.operations, basis.degree, terms, modulus)

    def squared_length(self):
        return sum(coefficient * coefficient for coefficient in self.terms.values())

    def coefficients(self):
        return [coefficient for _, coefficient in self.sorted_terms()]

    def sign_normalised(self):
        """
        The scalar multiple by +1 or -1 whose first term (basis order) is positive.
        """
        if self.is_zero():
            return self
        leading = self.sorted_terms()[0][1]
        if self.modulus is not None:
            negative = leading > self.modulus // 2
        else:
            negative = leading < 0
        return -self if negative else self

    def render(self):
        if self.is_zero():
            return '0'
        pieces = []
        for index, (tree, coefficient) in enumerate(self.sorted_terms()):
            monomial = Monomial.render(tree, self.operations.display_from_opening)
            if self.modulus is None and coefficient < 0:
                sign, magnitude = '-', -coefficient
            else:
                sign, magnitude = '+', coefficient
            magnitude_str = '' if magnitude == 1 else f'{magnitude} '
            if index == 0:
                pieces.append(f'{"-" if sign == "-" else ""}{magnitude_str}{monomial}')
            else:
                pieces.append(f'{sign} {magnitude_str}{monomial}')
        return ' '.join(pieces)

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f'MultilinearPoly({self.operations.name!r}, {self.degree}, {self.render()!r})'

    def to_json(self):
        return {
            'degree': self.degree,
            'ops': self.operations.name,
            'modulus': self.modulus,
            'terms': [
                {'type': Monomial.pattern(tree), 'perm': list(Monomial.leaves(tree)), 'coeff': str(coefficient)}
                for tree, coefficient in self.sorted_terms()
            ],
        }

    @staticmethod
    def from_json(document):
        try:
            operations = operation_set_from_name(document['ops'] if 'ops' in document else document['operations'])
            terms = [
                (term['type'], term['perm'], term['coeff']) if isinstance(term, dict) else term
                for term in document['terms']
            ]
            degree = document['degree']
        except KeyError as exception:
            raise MultilinearPoly.MalformedDocumentException(exception)

        modulus = document.get('modulus')
        pairs = [
            (Fraction(coefficient), Monomial.from_pattern(pattern, leaves))
            for pattern, leaves, coefficient in terms
        ]
        return MultilinearPoly.from_terms(operations, degree, pairs, modulus)

    class MalformedDocumentException(FreeOpsException):
        def __init__(self, key):
            super().__init__(f'malformed polynomial document: missing key {key}')


def apply_permutation(poly, images):
    return poly.relabelled(images)


def _substitution_lifting(poly, signature, variable):
    new_degree = poly.degree + signature.arity - 1
    new_variables = range(poly.degree + 1, new_degree + 1)
    replacement = (signature.opening, variable, *new_variables)
    return poly.map_trees(lambda tree: Monomial.substitute(tree, variable, replacement), new_degree)


def _embedding_lifting(poly, signature, slot):
    new_degree = poly.degree + signature.arity - 1
    new_variables = iter(range(poly.degree + 1, new_degree + 1))
    placements = [None if position == slot else next(new_variables) for position in range(signature.arity)]

    def embedded(tree):
        return (signature.opening, *(tree if child is None else child for child in placements))

    return poly.map_trees(embedded, new_degree)


def one_step_liftings(poly):
    """
    Liftings by one operation: substitutions x_i -> ω(x_i, new variables) by increasing i,
    then embeddings of the polynomial as argument j of ω by increasing j.
    """
    results = []
    for signature in poly.operations.signatures:
        for variable in range(1, poly.degree + 1):
            results.append(_substitution_lifting(poly, signature, variable))
        for slot in range(signature.arity):
            results.append(_embedding_lifting(poly, signature, slot))
    return results


def liftings(poly, target_degree):
    """
    All consequences of a polynomial reached by composing one-step liftings
    up to exactly `target_degree`, deduplicated up to sign.
    """
    if target_degree < poly.degree:
        raise FreeOpsException(f'cannot lift degree {poly.degree} down to degree {target_degree}')

    results = []
    seen = set()
    frontier = [poly]
    while frontier:
        next_frontier = []
        frontier_seen = set()
        for current in frontier:
            if current.degree == target_degree:
                key = current.sign_normalised()
                if key not in seen:
                    seen.add(key)
                    results.append(key)
                continue
            for lifted in one_step_liftings(current):
                if lifted.degree > target_degree:
                    continue
                key = lifted.sign_normalised()
                if key not in frontier_seen:
                    frontier_seen.add(key)
                    next_frontier.append(key)
        frontier = next_frontier
    return results


def shuffle_sum(composition, template, variables=None):
    """
    Sum of a template over the shuffles of some of its variables.

    `variables` are the permuted 1-based variables in order (default: the last n).
    """
    count = sum(composition)
    if variables is None:
        variables = list(range(template.degree - count + 1, template.degree + 1))
    if len(variables) != count:
        raise FreeOpsException(f'composition {composition} does not cover {len(variables)} variables')

    total = MultilinearPoly.zero(template.operations, template.degree, template.modulus)
    for shuffle in shuffles(composition):
        images = list(range(1, template.degree + 1))
        for position, image in enumerate(shuffle):
            images[variables[position] - 1] = variables[image]
        total = total + template.relabelled(images)
    return total


class PolynomialParseException(FreeOpsException):
    def __init__(self, position, message):
        self.position = position
        super().__init__(f'at position {position}: {message}')


def parse_polynomial(text, operations):
    """
    Parse a polynomial such as `[[a,b],c] - 2 {a,[b,c],d}`.

    Letters are variables, numbered in alphabetical order;
    every monomial must use every variable exactly once.
    """
    letters = sorted(set(re.findall(r'[a-z]', text)))
    variable_from_letter = {letter: index + 1 for index, letter in enumerate(letters)}
    degree = len(letters)
    position = 0

    def skip_spaces():
        nonlocal position
        while position < len(text) and text[position].isspace():
            position += 1

    def parse_monomial():
        nonlocal position
        skip_spaces()
        if position >= len(text):
            raise PolynomialParseException(position, 'expected a monomial, found end of text')
        character = text[position]
        if character in variable_from_letter:
            position += 1
            return variable_from_letter[character]
        if character not in operations.key_from_opening:
            raise PolynomialParseException(position, f'unexpected character `{character}`')

        opening = operations.key_from_opening[character]
        closing = CLOSING_FROM_OPENING[character]
        position += 1
        children = [parse_monomial()]
        skip_spaces()
        while position < len(text) and text[position] == ',':
            position += 1
            children.append(parse_monomial())
            skip_spaces()
        if position >= len(text) or text[position] != closing:
            raise PolynomialParseException(position, f'expected `{closing}`')
        position += 1
        return (opening, *children)

    pairs = []
    skip_spaces()
    first = True
    while position < len(text):
        sign = 1
        if text[position] in '+-':
            sign = -1 if text[position] == '-' else 1
            position += 1
            skip_spaces()
        elif not first:
            raise PolynomialParseException(position, 'expected `+` or `-`')

        match = COEFFICIENT_PATTERN.match(text, position)
        coefficient = 1
        if match:
            coefficient = Fraction(match.group(1))
            position = match.end()

        tree = parse_monomial()
        if sorted(Monomial.leaves(tree)) != list(range(1, degree + 1)):
            raise PolynomialParseException(position, 'monomial is not multilinear in all the variables')
        pairs.append((sign * coefficient, tree))
        first = False
        skip_spaces()

    return MultilinearPoly.from_terms(operations, degree, pairs)


class SymmetryAxiom:
    """
    A slot symmetry of one operation, checked directly on structure constants.
    """
    def __init__(self, name, opening, slots, sign):
        self.name = name
        self.opening = opening
        self.slots = slots
        self.sign = sign

    def __str__(self):
        i, j = self.slots
        kind = 'skew-symmetric' if self.sign < 0 else 'symmetric'
        return f'{self.name}: `{self.opening}` {kind} in slots {i} and {j}'


LY_BINARY = OperationSignature('product', 2, [(1, 2, -1)], '[]')
LY_TERNARY = OperationSignature('triple', 3, [(1, 2, -1)], '()', aliases=('{}', '<>', '⟨⟩'))
LJY_TERNARY = OperationSignature('jordan-triple', 3, [(1, 3, 1)], '()', display='{}', aliases=('<>', '⟨⟩'))
LJY_FULL_TERNARY = OperationSignature(
    'symmetric-triple', 3, [(1, 2, 1), (2, 3, 1)], '()', display='{}', aliases=('<>', '⟨⟩'),
)
JORDAN_BINARY = OperationSignature('circle', 2, [(1, 2, 1)], '[]')

OPERATION_SET_FROM_NAME = {
    'ly': OperationSet('ly', [LY_BINARY, LY_TERNARY]),
    'ljy': OperationSet('ljy', [LY_BINARY, LJY_TERNARY]),
    'ljy-full': OperationSet('ljy-full', [LY_BINARY, LJY_FULL_TERNARY]),
    'jordan': OperationSet('jordan', [JORDAN_BINARY, LJY_TERNARY]),
}


def operation_set_from_name(name):
    base, _, opset = name.partition('/')
    try:
        operations = OPERATION_SET_FROM_NAME[base]
    except KeyError:
        raise FreeOpsException(
            f'unrecognised operation set `{base}` (expected one of {", ".join(OPERATION_SET_FROM_NAME)})'
        )
    return operations.restrict(opset) if opset else operations


def enumerate_types(operations, degree):
    return operations.types(degree)


def enumerate_normal_monomials(operations, degree):
    return list(operations.basis(degree).monomials)


FILIPPOV_H_TEXT = (
    '[[[[a,b],c],d],e] + [[[[a,b],c],e],d] - [[[[a,b],d],c],e] - [[[[a,b],e],c],d]'
    ' + [[[[a,d],b],e],c] - [[[[a,d],e],b],c] + [[[[a,e],b],d],c] - [[[[a,e],d],b],c]'
    ' + 2[[[a,b],[c,d]],e] + 2[[[a,b],[c,e]],d] + 2[[[a,d],[b,e]],c] + 2[[[a,e],[b,d]],c]'
)

LJY3_DEGREE_6_FIGURE_TEXT = (
    '-9 {e,[[[b,d],a],c],f} - 9 [[{c,b,d},e],[a,f]] - 8 {c,[[a,f],[b,e]],d} - 8 [[{e,d,f},b],[a,c]]'
    ' - 6 [{c,b,d},[[e,f],a]] - 6 [[[{e,d,f},c],b],a] - 4 {c,[[[a,f],b],e],d} - 4 [{e,d,f},[[b,c],a]]'
    ' - 4 [{e,[[b,d],c],f},a] - 4 [[{e,d,f},[a,c]],b] - 3 {e,[[[b,d],c],a],f} - 3 {e,[[[a,d],b],c],f}'
    ' - 3 [{c,b,d},[[a,e],f]] - 3 [[{c,e,d},f],[a,b]] - 3 [{[[d,f],c],b,e},a] - 3 [{[[c,f],d],b,e},a]'
    ' - 2 {c,[[[e,f],a],b],d} - 2 {c,[[[b,f],a],e],d} - 2 [{e,d,f},[[a,b],c]] - 2 [{c,f,d},[[b,e],a]]'
    ' - 2 [[{c,e,d},a],[b,f]] - 2 [{e,[[c,d],b],f},a] - 2 [{e,[[b,c],d],f},a] - 2 [{[[d,e],f],b,c},a]'
    ' - 2 [{[[c,e],f],b,d},a] - 2 [[{c,f,d},[b,e]],a] - [{c,f,d},[[a,b],e]] - [{c,e,d},[[a,f],b]]'
    ' - [[{c,f,d},b],[a,e]] - [{[[d,f],e],b,c},a] - [{[[c,f],e],b,d},a] + [{c,e,d},[[a,b],f]]'
    ' + [{[[e,f],d],b,c},a] + [{[[e,f],c],b,d},a] + 2 {c,[[[e,f],b],a],d} + 2 {c,[[[b,f],e],a],d}'
    ' + 2 [{c,e,d},[[b,f],a]] + 2 [[{c,f,d},a],[b,e]] + 2 [[{e,d,f},[b,c]],a] + 2 [[{c,e,d},[b,f]],a]'
    ' + 3 {e,[[[c,d],b],a],f} + 3 {e,[[[a,d],c],b],f} + 3 [{c,f,d},[[a,e],b]] + 3 [{c,b,d},[[a,f],e]]'
    ' + 3 [[{c,f,d},e],[a,b]] + 3 [[{c,e,d},b],[a,f]] + 4 {c,[[a,e],[b,f]],d} + 4 {c,[[a,b],[e,f]],d}'
    ' + 4 {c,[[[a,f],e],b],d} + 4 [[{e,d,f},a],[b,c]] + 4 [[{c,f,d},[a,e]],b] + 6 [[{e,d,f},c],[a,b]]'
    ' + 6 [[{c,b,d},a],[e,f]] + 6 [[[{c,b,d},e],f],a] + 9 {e,[[[c,d],a],b],f} + 9 [[{c,b,d},f],[a,e]]'
    ' + 12 {e,[[a,d],[b,c]],f} + 12 {e,[[[b,c],d],a],f}'
)

# name -> (operation set, text, shuffle (composition, permuted letters) or None)
CATALOG = {
    'LY3': ('ly', '[[a,b],c] + [[b,c],a] + [[c,a],b] + (a,b,c) + (b,c,a) + (c,a,b)', None),
    'LY4': ('ly', '([a,b],c,d) + ([b,c],a,d) + ([c,a],b,d)', None),
    'LY5': ('ly', '(a,b,[c,d]) - [(a,b,c),d] - [c,(a,b,d)]', None),
    'LY6': ('ly', '(a,b,(c,d,e)) - ((a,b,c),d,e) - (c,(a,b,d),e) - (c,d,(a,b,e))', None),
    'Jacobi': ('ly', '[[a,b],c] + [[b,c],a] + [[c,a],b]', None),
    'Malcev': ('ljy', '[[a,c],[b,d]] - [[[a,b],c],d] - [[[b,c],d],a] - [[[c,d],a],b] - [[[d,a],b],c]', None),
    'FilippovH': ('ljy', FILIPPOV_H_TEXT, None),
    'LJY3-deg5-1': (
        'ljy',
        '2[[{a,c,d},b],e] + [[{a,c,d},e],b] - 2[[{a,e,d},b],c] - [[{a,e,d},c],b] + [{a,c,d},[b,e]]'
        ' - [{a,e,d},[b,c]] + {a,[[b,c],e],d} - {a,[[b,e],c],d} - 2{a,[[c,e],b],d}',
        None,
    ),
    'LJY3-deg5-2': (
        'ljy',
        '2{[[b,c],e],a,d} - 2{[[b,d],e],a,c} + {[[b,e],c],a,d} - {[[b,e],d],a,c} + 2{[[c,d],e],a,b}'
        ' - {[[c,e],b],a,d} + {[[c,e],d],a,b} + {[[d,e],b],a,c} - {[[d,e],c],a,b}',
        None,
    ),
    'LJY3-deg5-3': (
        'ljy',
        '{[[a,d],e],c,b} - {[[a,e],d],c,b} - {[[c,d],e],a,b} + {[[c,e],d],a,b} - 2{[[d,e],a],c,b}'
        ' + 2{[[d,e],c],a,b} + 2{b,[[a,c],d],e} - 2{b,[[a,c],e],d} + {b,[[a,d],c],e} - {b,[[a,e],c],d}'
        ' - {b,[[c,d],a],e} + {b,[[c,e],a],d}',
        None,
    ),
    'LJY3-deg6-1': ('ljy', '{[[b,c],d],a,[e,f]}', ((2, 1, 2), 'bcdef')),
    'LJY3-deg6-2': (
        'ljy',
        '3[{a,[c,d],e},[b,f]] + 3[{a,[[c,d],b],e},f] - 3[[c,d],{a,[b,f],e}] - 3[[[c,d],b],{a,f,e}]'
        ' - [{a,[[c,d],f],e},b] - [{a,b,e},[[c,d],f]]',
        ((2, 1), 'cdf'),
    ),
    'LJY3-deg6-3': ('ljy', LJY3_DEGREE_6_FIGURE_TEXT, None),
    'LieJordan-linking': ('ljy', '[[a,b],c] - {a,b,c} + {b,a,c}', None),
    'LieJordan-derivation': ('ljy', '[{a,b,c},d] - {[a,d],b,c} - {a,[b,d],c} - {a,b,[c,d]}', None),
    'JordanTriple': ('ljy', '{{a,b,c},d,e} - {{a,d,e},b,c} + {a,{b,e,d},c} - {a,b,{c,d,e}}', None),
    'Jordan': (
        'jordan',
        '[[[a,c],b],d] + [[[c,d],b],a] + [[[d,a],b],c] - [[a,c],[b,d]] - [[c,d],[b,a]] - [[d,a],[b,c]]',
        None,
    ),
}

SYMMETRY_AXIOM_FROM_NAME = {
    'LY1': SymmetryAxiom('LY1', '[', (1, 2), -1),
    'LY2': SymmetryAxiom('LY2', '(', (1, 2), -1),
    'LieJordan-skew': SymmetryAxiom('LieJordan-skew', '[', (1, 2), -1),
    'LieJordan-symmetry': SymmetryAxiom('LieJordan-symmetry', '(', (1, 3), 1),
    'Jordan-commutativity': SymmetryAxiom('Jordan-commutativity', '[', (1, 2), 1),
}

AXIOM_SUITES = {
    'LY': ('LY1', 'LY2', 'LY3', 'LY4', 'LY5', 'LY6'),
    'LieJordan': (
        'LieJordan-skew', 'LieJordan-symmetry', 'LieJordan-linking', 'LieJordan-derivation', 'JordanTriple',
    ),
    'Lie': ('LY1', 'Jacobi'),
    'Malcev': ('LieJordan-skew', 'Malcev'),
    'FilippovH': ('FilippovH',),
    'LJY3': (
        'LieJordan-skew', 'LieJordan-symmetry', 'Malcev', 'FilippovH',
        'LJY3-deg5-1', 'LJY3-deg5-2', 'LJY3-deg5-3',
        'LJY3-deg6-1', 'LJY3-deg6-2', 'LJY3-deg6-3',
    ),
    'Jordan': ('Jordan-commutativity', 'Jordan'),
}

_identity_from_name = {}


def catalog_identity(name):
    """
    A named identity from the catalog, as a canonical MultilinearPoly.
    """
    if name in _identity_from_name:
        return _identity_from_name[name]
    try:
        operations_name, text, shuffle = CATALOG[name]
    except KeyError:
        raise UnknownIdentityException(name)

    operations = operation_set_from_name(operations_name)
    poly = parse_polynomial(text, operations)
    if shuffle is not None:
        composition, letters = shuffle
        variables = [ord(letter) - ord('a') + 1 for letter in letters]
        poly = shuffle_sum(composition, poly, variables)

    _identity_from_name[name] = poly
    return poly


def axiom_from_name(name):
    """
    A named identity or symmetry axiom.
    """
    if name in SYMMETRY_AXIOM_FROM_NAME:
        return SYMMETRY_AXIOM_FROM_NAME[name]
    return catalog_identity(name)


def suite_names(name):
    """
    Expand a suite name (or a comma-separated list of names) into identity names.
    """
    names = []
    for part in name.split(','):
        part = part.strip()
        if not part:
            continue
        if part in AXIOM_SUITES:
            names.extend(AXIOM_SUITES[part])
        elif part in CATALOG or part in SYMMETRY_AXIOM_FROM_NAME:
            names.append(part)
        else:
            raise UnknownIdentityException(part)
    return names


class UnknownIdentityException(FreeOpsException):
    def __init__(self, name):
        known = ', '.join([*AXIOM_SUITES, *CATALOG, *SYMMETRY_AXIOM_FROM_NAME])
        super().__init__(f'identity `{name}` existeth not in the catalog (known: {known})')
