#!/usr/bin/env python3
"""Convert webpage/wiki graph releases to the nodespec text layout.

Input is the widely mirrored two-file format used for Texas, Cornell,
Wisconsin, Chameleon and Squirrel:

  out1_graph_edges.txt          header line, then <src> TAB <dst>
  out1_node_feature_label.txt   header line, then
                                <node_id> TAB <f,f,...,f> TAB <label>

Features are a comma-separated dense vector per node. No downloading happens
here: fetch the files yourself, then run

  python scripts/convert_geomgcn.py --edges out1_graph_edges.txt \
      --features out1_node_feature_label.txt --out data/texas
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from nodespec.data import Dataset, save_dataset
from nodespec.graph import build_graph


def convert(edge_path, feature_path, out_dir):
    rows = {}
    labels = {}
    with open(feature_path, "r", encoding="utf-8") as fh:
        next(fh)  # header
        for line in fh:
            node_str, feats, label = line.rstrip("\n").split("\t")
            node = int(node_str)
            rows[node] = [float(v) for v in feats.split(",")]
            labels[node] = int(label)
    n = max(rows) + 1
    if set(rows) != set(range(n)):
        raise SystemExit("feature file does not cover node ids 0..n-1")
    features = np.asarray([rows[i] for i in range(n)], dtype=np.float64)
    label_vec = np.asarray([labels[i] for i in range(n)], dtype=np.int64)

    edges = []
    with open(edge_path, "r", encoding="utf-8") as fh:
        next(fh)  # header
        for line in fh:
            parts = line.split()
            if len(parts) == 2:
                edges.append((int(parts[0]), int(parts[1])))

    out_dir = Path(out_dir)
    dataset = Dataset(graph=build_graph(edges, n), features=features,
                      labels=label_vec,
                      class_count=int(label_vec.max()) + 1,
                      name=out_dir.name)
    save_dataset(dataset, out_dir.parent, out_dir.name)
    print(f"wrote {out_dir}: n={dataset.n} edges={dataset.graph.edge_count} "
          f"f={dataset.feature_dim} classes={dataset.class_count}")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--edges", required=True)
    parser.add_argument("--features", required=True)
    parser.add_argument("--out", required=True,
                        help="output dataset directory, e.g. data/texas")
    args = parser.parse_args(argv)
    convert(args.edges, args.features, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
