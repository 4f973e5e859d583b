#!/usr/bin/env python3
"""Convert citation-network content/cites files to the nodespec text layout.

Input is the classic two-file format (e.g. cora.content / cora.cites):

  <paper_id> TAB <f_1> ... <f_k> TAB <class_label>     (content)
  <cited_id> TAB <citing_id>                           (cites)

Node ids follow content-file order; class labels are mapped to integers by
sorted label string. Citation pairs referencing unknown paper ids (present in
some releases) are dropped with a count. No downloading happens here: fetch
the files yourself, then run

  python scripts/convert_planetoid.py --content cora.content \
      --cites cora.cites --out data/cora
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from nodespec.data import Dataset, save_dataset
from nodespec.graph import build_graph


def convert(content_path, cites_path, out_dir):
    ids = []
    rows = []
    label_names = []
    with open(content_path, "r", encoding="utf-8") as fh:
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            if len(parts) < 3:
                continue
            ids.append(parts[0])
            rows.append([float(v) for v in parts[1:-1]])
            label_names.append(parts[-1])
    index = {pid: i for i, pid in enumerate(ids)}
    classes = sorted(set(label_names))
    class_index = {name: i for i, name in enumerate(classes)}
    labels = np.array([class_index[name] for name in label_names],
                      dtype=np.int64)
    features = np.asarray(rows, dtype=np.float64)

    edges = []
    dropped = 0
    with open(cites_path, "r", encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if len(parts) != 2:
                continue
            a, b = index.get(parts[0]), index.get(parts[1])
            if a is None or b is None:
                dropped += 1
                continue
            edges.append((a, b))

    out_dir = Path(out_dir)
    dataset = Dataset(graph=build_graph(edges, len(ids)), features=features,
                      labels=labels, class_count=len(classes),
                      name=out_dir.name)
    save_dataset(dataset, out_dir.parent, out_dir.name)
    print(f"wrote {out_dir}: n={dataset.n} edges={dataset.graph.edge_count} "
          f"f={dataset.feature_dim} classes={dataset.class_count} "
          f"(dropped {dropped} dangling citation pairs)")
    print("class mapping:", ", ".join(f"{i}={name}"
                                      for i, name in enumerate(classes)))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--content", required=True)
    parser.add_argument("--cites", required=True)
    parser.add_argument("--out", required=True,
                        help="output dataset directory, e.g. data/cora")
    args = parser.parse_args(argv)
    convert(args.content, args.cites, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
