#!/usr/bin/env python3

import json

from idforge.freeops import catalog_identity


def main():
    """
    Write the defining identities LY3 to LY6 as a known-identities file for `idforge find --known`:
    - LY3 in degree 3
    - LY4 and LY5 in degree 4
    - LY6 in degree 5.
    """
    documents = [catalog_identity(name).to_json() for name in ('LY3', 'LY4', 'LY5', 'LY6')]

    with open('known-ly.json', 'w', encoding='utf-8') as file:
        json.dump(documents, file, ensure_ascii=False, indent=2)


if __name__ == '__main__':
    main()
