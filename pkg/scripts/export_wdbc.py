"""Write scikit-learn's bundled copy of WDBC in the UCI ``wdbc.data`` layout.

Usage: python scripts/export_wdbc.py data/wdbc.data
"""

import sys
from pathlib import Path


def export(path) -> Path:
    from sklearn.datasets import load_breast_cancer

    d = load_breast_cancer()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # sklearn codes malignant as 0, benign as 1
    lines = []
    for i, (x, t) in enumerate(zip(d.data.tolist(), d.target.tolist())):
        lines.append(",".join([str(100000 + i), "B" if t == 1 else "M"] + [repr(v) for v in x]))
    path.write_text("\n".join(lines) + "\n")
    return path


if __name__ == "__main__":
    print(export(sys.argv[1] if len(sys.argv) > 1 else "data/wdbc.data"))
