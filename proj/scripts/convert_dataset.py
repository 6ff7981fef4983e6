#!/usr/bin/env python3
"""Convert network files into the plain "u v" edge lists lgcl reads.

  convert_dataset.py gml       power.gml   power.txt
  convert_dataset.py pajek     SmaGri.net  smg.txt
  convert_dataset.py matrix    Fdataset.mat fdataset.txt [--key didr]
  convert_dataset.py edgelist  in.txt      out.txt

Edges are made undirected, self-loops and duplicates dropped, and each pair
written once as "min max". Matrix input is a bipartite association matrix
(rows then columns become nodes 0..r-1 and r..r+c-1).
"""

import argparse
import sys


def write_pairs(pairs, path):
    seen = set()
    for u, v in pairs:
        if u == v:
            continue
        a, b = (u, v) if u < v else (v, u)
        seen.add((a, b))
    with open(path, "w") as f:
        for a, b in sorted(seen):
            f.write(f"{a} {b}\n")
    nodes = {x for e in seen for x in e}
    print(f"{path}: {len(nodes)} nodes, {len(seen)} edges", file=sys.stderr)


def from_gml(path):
    import networkx as nx

    g = nx.read_gml(path, label="id")
    return [(int(u), int(v)) for u, v in g.edges()]


def from_pajek(path):
    pairs = []
    section = None
    with open(path, encoding="latin-1") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            if line.startswith("*"):
                word = line[1:].split()[0].lower()
                section = word if word in ("arcs", "edges", "arcslist", "edgeslist") else "other"
                continue
            if section in ("arcs", "edges"):
                parts = line.split()
                pairs.append((int(parts[0]), int(parts[1])))
            elif section in ("arcslist", "edgeslist"):
                parts = [int(x) for x in line.split()]
                pairs.extend((parts[0], v) for v in parts[1:])
    return pairs


def from_matrix(path, key):
    import numpy as np

    if path.endswith(".mat"):
        from scipy.io import loadmat

        data = loadmat(path)
        if key is None:
            keys = [k for k in data if not k.startswith("__")]
            if len(keys) != 1:
                sys.exit(f"{path}: several variables {keys}; pick one with --key")
            key = keys[0]
        m = np.asarray(data[key])
    else:
        m = np.loadtxt(path)
    rows, cols = m.shape
    print(f"{path}: {rows} x {cols} association matrix", file=sys.stderr)
    return [(int(i), rows + int(j)) for i, j in zip(*np.nonzero(m))]


def from_edgelist(path):
    pairs = []
    with open(path) as f:
        for line in f:
            parts = line.split()
            if len(parts) >= 2 and not parts[0].startswith("#"):
                pairs.append((int(parts[0]), int(parts[1])))
    return pairs


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("format", choices=["gml", "pajek", "matrix", "edgelist"])
    ap.add_argument("input")
    ap.add_argument("output")
    ap.add_argument("--key", help="variable name inside a .mat file")
    args = ap.parse_args()
    if args.format == "gml":
        pairs = from_gml(args.input)
    elif args.format == "pajek":
        pairs = from_pajek(args.input)
    elif args.format == "matrix":
        pairs = from_matrix(args.input, args.key)
    else:
        pairs = from_edgelist(args.input)
    write_pairs(pairs, args.output)


if __name__ == "__main__":
    main()
