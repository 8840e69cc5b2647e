import numpy as np
import pytest

from mleval.data import EXPECTED_SCHEMA, FEATURE_HEADER


def write_feature_csv(path, rows):
    """rows: list of dicts keyed by the schema columns (missing -> '')."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {EXPECTED_SCHEMA}\n")
        fh.write(",".join(FEATURE_HEADER) + "\n")
        for row in rows:
            fh.write(",".join(str(row.get(col, "")) for col in FEATURE_HEADER) + "\n")
    return path


def synthetic_rows(n=120, seed=0, delta_fn=None):
    """Plausible feature rows with controllable fan_delta."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        fans = int(rng.integers(10, 5000))
        k_in = int(rng.integers(0, 2000))
        delta = delta_fn(i, fans, k_in, rng) if delta_fn else int(rng.integers(-50, 200))
        rows.append({
            "id": f"x_{i:05d}",
            "p": "r" if i % 2 else "b",
            "c": str(1 + i % 4),
            "wbt": ["SCC", "IN", "OUT", "NA"][i % 4],
            "abt": ["SCC", "IN", "OUT", "NA"][(i + 1) % 4],
            "f": fans,
            "log_f": np.log10(1 + fans),
            "k_in": k_in,
            "k_out": int(rng.integers(0, 2000)),
            "kps_in": "" if k_in == 0 else round(float(rng.random()), 6),
            "kps_out": round(float(rng.random()), 6),
            "kcs_in": "" if i % 7 == 0 else round(float(rng.random()), 6),
            "kcs_out": round(float(rng.random()), 6),
            "pagerank": round(float(rng.random()) / n, 9),
            "betweenness": round(float(rng.random()) / 10, 9),
            "fan_delta": int(delta),
        })
    return rows


@pytest.fixture
def synthetic_csv(tmp_path):
    return write_feature_csv(tmp_path / "features.csv", synthetic_rows())
