"""
# Identity Forge: utilities.py

Utility classes and methods.

**Copyright 2024–2026 Conway**
Licensed under the GNU General Public License v3.0 (GPL-3.0-only).
This is free software with NO WARRANTY etc. etc., see LICENSE.
"""

import csv
import itertools
import math
import os


def compositions(total, part_count):
    """
    Compositions of `total` into `part_count` positive parts, in descending lexicographical order.

    For example, compositions(4, 2) gives (3, 1), (2, 2), (1, 3).
    """
    if part_count == 1:
        if total >= 1:
            yield (total,)
        return

    for first in range(total - part_count + 1, 0, -1):
        for rest in compositions(total - first, part_count - 1):
            yield (first, *rest)


def shuffles(composition):
    """
    Shuffle permutations for a composition n_1 + ... + n_k = n.

    Returns tuples `images` (0-based) such that position i is sent to images[i],
    with images increasing within each block of consecutive positions.
    The count is the multinomial coefficient n! / (n_1! ... n_k!).
    """
    total = sum(composition)
    results = []

    def extend(block_index, remaining, images):
        if block_index == len(composition):
            results.append(tuple(images))
            return
        for chosen in itertools.combinations(remaining, composition[block_index]):
            rest = [image for image in remaining if image not in chosen]
            extend(block_index + 1, rest, images + list(chosen))

    extend(0, list(range(total)), [])
    return results


def permutation_sign(permutation):
    """
    Sign of a permutation given as a tuple of 0-based images.
    """
    sign = 1
    seen = [False] * len(permutation)
    for start in range(len(permutation)):
        if seen[start]:
            continue
        length = 0
        position = start
        while not seen[position]:
            seen[position] = True
            position = permutation[position]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def compose_permutations(tau, sigma):
    """
    The composite τσ (apply σ first) of permutations given as 0-based image tuples.
    """
    return tuple(tau[image] for image in sigma)


def integer_content(values):
    """
    Greatest common divisor of some integers (0 if all are 0).
    """
    content = 0
    for value in values:
        content = math.gcd(content, int(value))
    return content


def lcm_of(values):
    result = 1
    for value in values:
        result = math.lcm(result, int(value))
    return result


def letter_from_variable(variable):
    """
    Display letter for a 1-based variable index: 1 -> a, 2 -> b, etc.
    """
    if 1 <= variable <= 26:
        return chr(ord('a') + variable - 1)
    return f'x{variable}'


class Table:
    def __init__(self, field_names, rows):
        self.field_names = field_names
        self.rows = rows

    def __str__(self):
        return '\n'.join([
            f'Table(',
            f'  field_names={repr(self.field_names)},',
            f'  rows=[',
            *[f'    {repr(row)},' for row in self.rows],
            f'  ],',
            f')',
        ])

    def write_tsv(self, file_name):
        with open(file_name, 'w', encoding='utf-8', newline='') as file:
            writer = csv.writer(file, delimiter='\t', lineterminator=os.linesep)
            writer.writerow(self.field_names)
            writer.writerows(self.rows)
