#!/usr/bin/env python3

from idforge.algebras import build_LY, verify_axioms
from idforge.exactfield import PrimeField
from idforge.freeops import catalog_identity, suite_names
from idforge.idfinder import SearchConfig, new_identities


def main():
    ly4 = build_LY(4, PrimeField(103))
    print(ly4.dim)
    print([str(result) for result in verify_axioms(ly4, suite_names('LY'), trials=5)])
    print(catalog_identity('LY3'))

    print(end='\n\n')

    print('## Algebra', end='\n\n')
    print(ly4, end='\n\n\n')

    print('## Degree 3', end='\n\n')
    config = SearchConfig(prime=103, seed=0)
    print(new_identities(ly4, 3, 'mixed', config).render(), end='\n\n\n')

    print('## Degree 4', end='\n\n')
    known = {3: [catalog_identity('LY3')]}
    print(new_identities(ly4, 4, 'mixed', config, known).render(), end='\n\n\n')


if __name__ == '__main__':
    main()
