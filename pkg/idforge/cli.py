"""
# Identity Forge: cli.py

Command-line interface.

**Copyright 2024–2026 Conway**
Licensed under the GNU General Public License v3.0 (GPL-3.0-only).
This is free software with NO WARRANTY etc. etc., see LICENSE.
"""

import argparse
import json
import logging
import os
import sys

from idforge._version import __version__
from idforge.algebras import (
    AlgebraException, StructureConstantAlgebra,
    build_LJY, build_LY, build_LY3_transvection, build_LY4_tensor,
    build_jordan_H, build_lie_triple_H, build_skew_lie_jordan,
    verify_axioms,
)
from idforge.exactfield import ExactFieldException, ReconstructionException, field_from_spec
from idforge.freeops import FreeOpsException, MultilinearPoly, suite_names
from idforge.idfinder import SearchConfig, SearchException, default_known, new_identities
from idforge.reproduce import SECTIONS, Reproduction


EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_RECONSTRUCTION = 3

BUILDER_FROM_FAMILY = {
    'ly': lambda n, field: build_LY(n, field),
    'ljy': lambda n, field: build_LJY(n, field),
    'ly3-transvection': lambda n, field: build_LY3_transvection(field),
    'ly4-tensor': lambda n, field: build_LY4_tensor(field),
    'jordan-h': lambda n, field: build_jordan_H(n, field),
    'lie-triple-h': lambda n, field: build_lie_triple_H(n, field),
    'skew-lie-jordan': lambda n, field: build_skew_lie_jordan(n, field),
}


def positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f'expected a positive integer, got {text}')
    return value


def parse_command_line_arguments(arguments=None):
    argument_parser = argparse.ArgumentParser(
        description='Build structure-constant algebras and search for their polynomial identities.',
    )
    argument_parser.add_argument(
        '-v', '--version',
        action='version',
        version=f'{argument_parser.prog} version {__version__}',
    )
    argument_parser.add_argument('--verbose', action='store_true', help='log progress (INFO)')
    argument_parser.add_argument('--debug', action='store_true', help='log everything (DEBUG)')
    argument_parser.add_argument(
        '--threads',
        type=positive_int,
        help='threads for monomial evaluation (default: IDFORGE_THREADS, else all cores)',
    )
    subparsers = argument_parser.add_subparsers(dest='command', required=True)

    build_parser = subparsers.add_parser('build', help='build an algebra and write its structure constants')
    build_parser.add_argument('--family', required=True, choices=sorted(BUILDER_FROM_FAMILY))
    build_parser.add_argument('--n', type=int, default=3, help='matrix size (ignored by the fixed models)')
    build_parser.add_argument('--field', default='q-sqrt2', help='`q-sqrt2`, `gfp:<p>` or `gfp:<p>:sqrt2=<r>`')
    build_parser.add_argument('--out', required=True, metavar='algebra.json')

    verify_parser = subparsers.add_parser('verify', help='check identities on an algebra')
    verify_parser.add_argument('--algebra', required=True, metavar='algebra.json')
    verify_parser.add_argument(
        '--identities', required=True,
        help='a suite (LY, LieJordan, Lie, Malcev, FilippovH, LJY3, Jordan) or comma-separated identity names',
    )
    verify_parser.add_argument('--mode', choices=['exhaustive', 'random'], default='random')
    verify_parser.add_argument('--trials', type=positive_int, default=50)
    verify_parser.add_argument('--seed', type=int, default=0)

    find_parser = subparsers.add_parser('find', help='search for the new identities of one degree')
    find_parser.add_argument('--algebra', required=True, metavar='algebra.json')
    find_parser.add_argument('--degree', required=True, type=positive_int)
    find_parser.add_argument('--ops', choices=['binary', 'ternary', 'mixed'], default='mixed')
    find_parser.add_argument('--prime', type=int, default=103)
    find_parser.add_argument('--sqrt2', type=int, help='square root of 2 modulo the prime (default: the smaller)')
    find_parser.add_argument('--seed', type=int, default=0)
    find_parser.add_argument('--stabilize', type=positive_int, default=10)
    find_parser.add_argument('--max-iterations', type=positive_int, default=200)
    find_parser.add_argument(
        '--known', metavar='known.json',
        help='JSON list of known identities (default: the catalog identities LY3 to LY6 for LY algebras)',
    )
    find_parser.add_argument(
        '--exact', metavar='exact.json',
        help='exact (q-sqrt2) algebra on which to check new identities in characteristic 0',
    )
    find_parser.add_argument('--out', metavar='report.json')

    reproduce_parser = subparsers.add_parser('reproduce', help='recompute the golden numbers and compare')
    reproduce_parser.add_argument('--paper-section', dest='sections', required=True, nargs='+', choices=SECTIONS)
    reproduce_parser.add_argument('--out-dir', required=True)
    reproduce_parser.add_argument('--seed', type=int, default=0)
    reproduce_parser.add_argument(
        '--extended', action='store_true',
        help='include the degree-6 searches (also enabled by IDFORGE_EXTENDED=1)',
    )

    return argument_parser.parse_args(arguments)


def configure_logging(parsed_arguments):
    if parsed_arguments.debug:
        level = logging.DEBUG
    elif parsed_arguments.verbose:
        level = logging.INFO
    else:
        level = logging.WARNING
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))
    root_logger = logging.getLogger('idforge')
    root_logger.handlers[:] = [handler]
    root_logger.setLevel(level)


def fail(message, exit_code=EXIT_USAGE):
    print(f'Error: {message}', file=sys.stderr)
    sys.exit(exit_code)


def read_json(file_name):
    if os.path.isdir(file_name):
        fail(f'`{file_name}` is a directory, not a file')
    try:
        with open(file_name, 'r', encoding='utf-8') as file:
            return json.load(file)
    except FileNotFoundError:
        fail(f'file `{file_name}` existeth not')
    except json.JSONDecodeError as exception:
        fail(f'file `{file_name}` is not valid JSON: {exception}')


def write_json(file_name, document):
    with open(file_name, 'w', encoding='utf-8') as file:
        json.dump(document, file, ensure_ascii=False, indent=2)


def read_algebra(file_name):
    return StructureConstantAlgebra.from_json(read_json(file_name))


def read_known(file_name):
    documents = read_json(file_name)
    if not isinstance(documents, list):
        fail(f'file `{file_name}` should hold a list of polynomials')
    known = {}
    for document in documents:
        poly = MultilinearPoly.from_json(document)
        known.setdefault(poly.degree, []).append(poly)
    return known


def extended_enabled(parsed_arguments):
    return parsed_arguments.extended or os.environ.get('IDFORGE_EXTENDED') == '1'


def command_build(parsed_arguments):
    field = field_from_spec(parsed_arguments.field)
    algebra = BUILDER_FROM_FAMILY[parsed_arguments.family](parsed_arguments.n, field)
    write_json(parsed_arguments.out, algebra.to_json())
    print(f'{algebra.name}: {algebra.dim}-dimensional over {field.spec}, written to `{parsed_arguments.out}`')
    return 0


def command_verify(parsed_arguments):
    algebra = read_algebra(parsed_arguments.algebra)
    names = suite_names(parsed_arguments.identities)
    results = verify_axioms(
        algebra, names, parsed_arguments.mode, parsed_arguments.trials, parsed_arguments.seed,
    )
    for result in results:
        print(result)
    return 0 if all(result.passed for result in results) else EXIT_MISMATCH


def command_find(parsed_arguments, threads):
    algebra = read_algebra(parsed_arguments.algebra)
    exact_algebra = None if parsed_arguments.exact is None else read_algebra(parsed_arguments.exact)
    if parsed_arguments.known is None:
        known = default_known(algebra.operations.name, parsed_arguments.degree)
    else:
        known = read_known(parsed_arguments.known)

    config = SearchConfig(
        parsed_arguments.prime, parsed_arguments.sqrt2, parsed_arguments.seed, parsed_arguments.stabilize,
        parsed_arguments.degree, parsed_arguments.ops, parsed_arguments.max_iterations, threads,
    )
    report = new_identities(algebra, parsed_arguments.degree, parsed_arguments.ops, config, known, exact_algebra)
    print(report.render())
    if parsed_arguments.out:
        write_json(parsed_arguments.out, report.to_json())

    if report.reconstruction_failures:
        print(
            f'Error: rational reconstruction failed for {report.reconstruction_failures} generator(s);'
            f' rerun with a larger prime',
            file=sys.stderr,
        )
        return EXIT_RECONSTRUCTION
    if report.verification_failures:
        return EXIT_MISMATCH
    return 0


def command_reproduce(parsed_arguments, threads):
    config = SearchConfig(seed=parsed_arguments.seed, threads=threads)
    reproduction = Reproduction(parsed_arguments.out_dir, config, extended_enabled(parsed_arguments))
    table, mismatches = reproduction.run(parsed_arguments.sections)

    width = max((len(row[1]) for row in table.rows), default=0)
    for section, check, expected, computed, status in table.rows:
        print(f'[{section}] {check.ljust(width)}  expected {expected}, computed {computed}  {status}')
    print(f'{mismatches} mismatch(es); comparison written to `{parsed_arguments.out_dir}/comparison.tsv`')
    return EXIT_MISMATCH if mismatches else 0


def main(arguments=None):
    parsed_arguments = parse_command_line_arguments(arguments)
    configure_logging(parsed_arguments)
    threads = parsed_arguments.threads

    try:
        if parsed_arguments.command == 'build':
            exit_code = command_build(parsed_arguments)
        elif parsed_arguments.command == 'verify':
            exit_code = command_verify(parsed_arguments)
        elif parsed_arguments.command == 'find':
            exit_code = command_find(parsed_arguments, threads)
        elif parsed_arguments.command == 'reproduce':
            exit_code = command_reproduce(parsed_arguments, threads)
        else:
            raise RuntimeError(f'Implementation error: unhandled command `{parsed_arguments.command}`')
    except ReconstructionException as exception:
        fail(exception.message, EXIT_RECONSTRUCTION)
    except (ExactFieldException, FreeOpsException, AlgebraException, SearchException) as exception:
        fail(exception.message)

    sys.exit(exit_code)


if __name__ == '__main__':
    main()
