from splinecomplex.catalog import CATALOG, geometry_catalog
from splinecomplex.multipatch import as_multipatch


def cmd_list_geometries(args) -> int:
    for name, (_, description) in CATALOG.items():
        geometry = as_multipatch(geometry_catalog(name))
        print(f"{name:<24} {geometry.dim}D  {geometry.n_patches:>2} patches  {description}")
    return 0


def register(subparsers):
    parser = subparsers.add_parser("list-geometries", help="list the built-in geometries")
    parser.set_defaults(func=cmd_list_geometries)
    return parser
