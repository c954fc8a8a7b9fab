#!/usr/bin/env python3

from idforge.algebras import build_LJY
from idforge.exactfield import PrimeField
from idforge.freeops import catalog_identity
from idforge.idfinder import SearchConfig, new_identities


def main():
    """
    The degree 5 identities of LJY3 not following from Malcev and FilippovH.
    The search is over GF(103); generators are checked on the exact algebra over Q(√2).
    """
    config = SearchConfig(prime=103, seed=0)
    ljy3 = build_LJY(3, PrimeField(103))
    known = {
        4: [catalog_identity('Malcev')],
        5: [catalog_identity('FilippovH')],
    }

    report = new_identities(ljy3, 5, 'mixed', config, known, exact_algebra=build_LJY(3))
    print(report.render())


if __name__ == '__main__':
    main()
