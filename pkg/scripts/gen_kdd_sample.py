#!/usr/bin/env python3
"""Generate the committed KDD99-format sample fixture.

The real KDD99 corpus cannot be fetched in the offline build environment,
so the test fixture is a deterministic synthetic sample in the exact KDD99
CSV format (41 fields + label with trailing period). Per-label generators
mimic the well-known signatures of each attack family so that a forest
trained on it behaves like one trained on the real cut (high, non-trivial
held-out accuracy).

Usage: python3 scripts/gen_kdd_sample.py [n_rows] [out_path]
"""

import sys

import numpy as np

RNG = np.random.default_rng(20240901)

SERVICES_NORMAL = ["http", "smtp", "domain_u", "ftp_data", "other", "private"]


def base():
    # 41 fields in canonical order, all zero / neutral
    return {
        "duration": 0, "protocol_type": "tcp", "service": "http", "flag": "SF",
        "src_bytes": 0, "dst_bytes": 0, "land": 0, "wrong_fragment": 0,
        "urgent": 0, "hot": 0, "num_failed_logins": 0, "logged_in": 0,
        "num_compromised": 0, "root_shell": 0, "su_attempted": 0, "num_root": 0,
        "num_file_creations": 0, "num_shells": 0, "num_access_files": 0,
        "num_outbound_cmds": 0, "is_host_login": 0, "is_guest_login": 0,
        "count": 1, "srv_count": 1, "serror_rate": 0.0, "srv_serror_rate": 0.0,
        "rerror_rate": 0.0, "srv_rerror_rate": 0.0, "same_srv_rate": 1.0,
        "diff_srv_rate": 0.0, "srv_diff_host_rate": 0.0, "dst_host_count": 100,
        "dst_host_srv_count": 100, "dst_host_same_srv_rate": 1.0,
        "dst_host_diff_srv_rate": 0.0, "dst_host_same_src_port_rate": 0.1,
        "dst_host_srv_diff_host_rate": 0.0, "dst_host_serror_rate": 0.0,
        "dst_host_srv_serror_rate": 0.0, "dst_host_rerror_rate": 0.0,
        "dst_host_srv_rerror_rate": 0.0,
    }


def rate(x):
    return round(float(np.clip(x, 0.0, 1.0)), 2)


def gen_normal():
    r = base()
    r["service"] = RNG.choice(SERVICES_NORMAL, p=[0.45, 0.2, 0.15, 0.1, 0.05, 0.05])
    r["protocol_type"] = "udp" if r["service"] == "domain_u" else "tcp"
    r["duration"] = int(RNG.exponential(15))
    r["src_bytes"] = int(RNG.lognormal(5.5, 1.0))
    r["dst_bytes"] = int(RNG.lognormal(6.5, 1.2))
    r["logged_in"] = 1 if r["protocol_type"] == "tcp" else 0
    r["count"] = int(RNG.integers(1, 25))
    r["srv_count"] = max(1, int(r["count"] * RNG.uniform(0.5, 1.0)))
    r["same_srv_rate"] = rate(RNG.uniform(0.8, 1.0))
    r["diff_srv_rate"] = rate(RNG.uniform(0.0, 0.1))
    r["serror_rate"] = rate(abs(RNG.normal(0, 0.02)))
    r["rerror_rate"] = rate(abs(RNG.normal(0, 0.02)))
    r["dst_host_count"] = int(RNG.integers(10, 256))
    r["dst_host_srv_count"] = int(RNG.integers(10, 256))
    r["dst_host_same_srv_rate"] = rate(RNG.uniform(0.7, 1.0))
    r["dst_host_same_src_port_rate"] = rate(RNG.uniform(0.0, 0.2))
    return r


def gen_smurf():
    r = base()
    r["protocol_type"], r["service"], r["flag"] = "icmp", "ecr_i", "SF"
    r["src_bytes"] = int(RNG.choice([520, 1032]))
    r["count"] = int(RNG.integers(350, 512))
    r["srv_count"] = r["count"]
    r["dst_host_count"] = 255
    r["dst_host_srv_count"] = 255
    r["dst_host_same_src_port_rate"] = 1.0
    return r


def gen_neptune():
    r = base()
    r["service"] = RNG.choice(["private", "telnet", "finger", "http"])
    r["flag"] = RNG.choice(["S0", "S0", "S0", "REJ"])
    r["count"] = int(RNG.integers(80, 330))
    r["srv_count"] = max(1, int(r["count"] * RNG.uniform(0.02, 0.12)))
    r["serror_rate"] = rate(RNG.uniform(0.9, 1.0))
    r["srv_serror_rate"] = rate(RNG.uniform(0.9, 1.0))
    r["same_srv_rate"] = rate(RNG.uniform(0.0, 0.1))
    r["diff_srv_rate"] = rate(RNG.uniform(0.05, 0.2))
    r["dst_host_count"] = 255
    r["dst_host_srv_count"] = int(RNG.integers(1, 30))
    r["dst_host_same_srv_rate"] = rate(RNG.uniform(0.0, 0.1))
    r["dst_host_serror_rate"] = rate(RNG.uniform(0.9, 1.0))
    r["dst_host_srv_serror_rate"] = rate(RNG.uniform(0.9, 1.0))
    return r


def gen_back():
    r = gen_normal()
    r["protocol_type"], r["service"], r["flag"] = "tcp", "http", "SF"
    r["src_bytes"] = int(RNG.integers(50000, 60000))
    r["dst_bytes"] = int(RNG.integers(2000, 10000))
    r["hot"] = int(RNG.integers(0, 3))
    r["logged_in"] = 1
    return r


def gen_teardrop():
    r = base()
    r["protocol_type"], r["service"] = "udp", "private"
    r["wrong_fragment"] = int(RNG.integers(1, 4))
    r["src_bytes"] = 28
    r["count"] = int(RNG.integers(1, 150))
    r["srv_count"] = r["count"]
    return r


def gen_pod():
    r = base()
    r["protocol_type"], r["service"] = "icmp", "ecr_i"
    r["src_bytes"] = int(RNG.integers(564, 1481))
    r["wrong_fragment"] = 1
    r["count"] = int(RNG.integers(1, 20))
    return r


def gen_land():
    r = base()
    r["service"], r["flag"] = "finger", "S0"
    r["land"] = 1
    r["serror_rate"] = 1.0
    r["srv_serror_rate"] = 1.0
    return r


def gen_satan():
    r = base()
    r["service"] = RNG.choice(["private", "other", "telnet", "http", "finger"])
    r["flag"] = RNG.choice(["REJ", "SF", "RSTR"])
    r["duration"] = 0
    r["count"] = int(RNG.integers(2, 30))
    r["srv_count"] = int(RNG.integers(2, 30))
    r["rerror_rate"] = rate(RNG.uniform(0.5, 1.0))
    r["srv_rerror_rate"] = rate(RNG.uniform(0.5, 1.0))
    r["diff_srv_rate"] = rate(RNG.uniform(0.4, 1.0))
    r["same_srv_rate"] = rate(RNG.uniform(0.0, 0.3))
    r["dst_host_diff_srv_rate"] = rate(RNG.uniform(0.4, 1.0))
    r["dst_host_rerror_rate"] = rate(RNG.uniform(0.5, 1.0))
    r["dst_host_same_srv_rate"] = rate(RNG.uniform(0.0, 0.2))
    return r


def gen_ipsweep():
    r = base()
    r["protocol_type"], r["service"], r["flag"] = "icmp", "eco_i", "SF"
    r["src_bytes"] = int(RNG.choice([8, 18]))
    r["count"] = int(RNG.integers(1, 6))
    r["srv_count"] = int(RNG.integers(1, 6))
    r["dst_host_count"] = int(RNG.integers(1, 60))
    r["dst_host_srv_count"] = int(RNG.integers(1, 60))
    r["srv_diff_host_rate"] = rate(RNG.uniform(0.5, 1.0))
    r["dst_host_srv_diff_host_rate"] = rate(RNG.uniform(0.5, 1.0))
    r["dst_host_same_srv_rate"] = rate(RNG.uniform(0.8, 1.0))
    return r


def gen_portsweep():
    r = base()
    r["service"] = "private"
    r["flag"] = RNG.choice(["REJ", "S0", "RSTR"])
    r["count"] = int(RNG.integers(1, 10))
    r["srv_count"] = 1
    r["diff_srv_rate"] = rate(RNG.uniform(0.6, 1.0))
    r["same_srv_rate"] = rate(RNG.uniform(0.0, 0.2))
    r["rerror_rate"] = rate(RNG.uniform(0.4, 1.0))
    r["dst_host_diff_srv_rate"] = rate(RNG.uniform(0.6, 1.0))
    r["dst_host_same_src_port_rate"] = rate(RNG.uniform(0.8, 1.0))
    r["dst_host_rerror_rate"] = rate(RNG.uniform(0.4, 1.0))
    return r


def gen_nmap():
    r = gen_ipsweep()
    r["src_bytes"] = int(RNG.choice([8, 20, 24]))
    r["dst_host_same_src_port_rate"] = rate(RNG.uniform(0.7, 1.0))
    return r


def gen_guess_passwd():
    r = base()
    r["service"] = RNG.choice(["ftp", "telnet", "pop_3"])
    r["flag"] = RNG.choice(["SF", "RSTO"])
    r["duration"] = int(RNG.integers(1, 10))
    r["src_bytes"] = int(RNG.integers(100, 160))
    r["dst_bytes"] = int(RNG.integers(200, 400))
    r["num_failed_logins"] = int(RNG.integers(1, 6))
    r["hot"] = int(RNG.integers(0, 2))
    return r


def gen_warezclient():
    r = base()
    r["service"], r["flag"] = "ftp_data", "SF"
    r["duration"] = int(RNG.integers(0, 300))
    r["src_bytes"] = int(RNG.lognormal(10.0, 1.0))
    r["logged_in"] = 1
    r["is_guest_login"] = 1
    r["hot"] = int(RNG.integers(1, 5))
    return r


def gen_ftp_write():
    r = base()
    r["service"], r["flag"] = "ftp", "SF"
    r["duration"] = int(RNG.integers(10, 200))
    r["src_bytes"] = int(RNG.integers(200, 400))
    r["logged_in"] = 1
    r["num_file_creations"] = 1
    r["num_access_files"] = 1
    r["is_guest_login"] = 1
    return r


def gen_imap():
    r = base()
    r["service"], r["flag"] = "imap4", RNG.choice(["SF", "RSTO"])
    r["duration"] = int(RNG.integers(1, 60))
    r["src_bytes"] = int(RNG.integers(1000, 1500))
    return r


def gen_phf():
    r = base()
    r["service"], r["flag"] = "http", "SF"
    r["src_bytes"] = 51
    r["dst_bytes"] = int(RNG.integers(8000, 9000))
    r["logged_in"] = 1
    r["num_access_files"] = 1
    return r


def gen_buffer_overflow():
    r = base()
    r["service"], r["flag"] = "telnet", "SF"
    r["duration"] = int(RNG.integers(100, 400))
    r["src_bytes"] = int(RNG.integers(1000, 2500))
    r["dst_bytes"] = int(RNG.integers(200, 10000))
    r["logged_in"] = 1
    r["hot"] = int(RNG.integers(2, 6))
    r["root_shell"] = 1
    r["num_root"] = int(RNG.integers(1, 6))
    r["num_file_creations"] = int(RNG.integers(1, 4))
    return r


def gen_rootkit():
    r = gen_buffer_overflow()
    r["service"] = RNG.choice(["telnet", "ftp_data"])
    r["num_root"] = int(RNG.integers(2, 10))
    r["num_file_creations"] = int(RNG.integers(2, 6))
    r["su_attempted"] = int(RNG.integers(0, 2))
    return r


def gen_loadmodule():
    r = gen_buffer_overflow()
    r["duration"] = int(RNG.integers(20, 120))
    r["num_shells"] = 1
    return r


def gen_perl():
    r = gen_buffer_overflow()
    r["duration"] = int(RNG.integers(20, 80))
    r["num_shells"] = int(RNG.integers(1, 3))
    r["su_attempted"] = 1
    return r


GENERATORS = [
    ("normal", gen_normal, 0.58),
    ("smurf", gen_smurf, 0.12),
    ("neptune", gen_neptune, 0.10),
    ("back", gen_back, 0.02),
    ("teardrop", gen_teardrop, 0.01),
    ("pod", gen_pod, 0.005),
    ("land", gen_land, 0.002),
    ("satan", gen_satan, 0.03),
    ("ipsweep", gen_ipsweep, 0.025),
    ("portsweep", gen_portsweep, 0.02),
    ("nmap", gen_nmap, 0.01),
    ("guess_passwd", gen_guess_passwd, 0.015),
    ("warezclient", gen_warezclient, 0.015),
    ("ftp_write", gen_ftp_write, 0.002),
    ("imap", gen_imap, 0.002),
    ("phf", gen_phf, 0.001),
    ("buffer_overflow", gen_buffer_overflow, 0.005),
    ("rootkit", gen_rootkit, 0.002),
    ("loadmodule", gen_loadmodule, 0.0015),
    ("perl", gen_perl, 0.001),
]

FIELD_ORDER = list(base().keys())

NUMERIC_FIELDS = [k for k in FIELD_ORDER
                  if k not in ("protocol_type", "service", "flag")]


def contaminate(row, gens, labels):
    """Blend a minority of fields with a row from another class so the
    classes overlap and held-out accuracy stays below 1.0."""
    other = gens[str(RNG.choice(labels))]()
    for k in RNG.choice(NUMERIC_FIELDS, size=14, replace=False):
        row[k] = other[k]
    return row


def main(n_rows=12000, out_path="tests/fixtures/kdd_sample.csv"):
    labels = [g[0] for g in GENERATORS]
    probs = np.array([g[2] for g in GENERATORS])
    probs = probs / probs.sum()
    gens = {g[0]: g[1] for g in GENERATORS}
    # guarantee a handful of every label so stratified splits always work
    choices = list(labels) * 5
    choices += list(RNG.choice(labels, size=n_rows - len(choices), p=probs))
    RNG.shuffle(choices)
    with open(out_path, "w", encoding="utf-8") as fh:
        for label in choices:
            row = gens[label]()
            if RNG.random() < 0.06:
                row = contaminate(row, gens, labels)
            fields = [str(row[k]) for k in FIELD_ORDER]
            fh.write(",".join(fields) + f",{label}.\n")
    print(f"wrote {len(choices)} rows to {out_path}")


if __name__ == "__main__":
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 12000
    out = sys.argv[2] if len(sys.argv) > 2 else "tests/fixtures/kdd_sample.csv"
    main(n, out)
