#!/usr/bin/env python3
"""Command-line contract tests: exit codes, stream discipline, determinism."""

import json
import os
import subprocess
import sys

CLI = os.environ.get("BCFEED_CLI")
if not CLI:
    sys.exit("BCFEED_CLI must point at the bcfeed binary")

passed = 0


def run(args, stdin=None):
    return subprocess.run(
        [CLI] + args, input=stdin, capture_output=True, text=True, timeout=300
    )


def ok(cond, what):
    global passed
    if not cond:
        sys.exit(f"FAIL: {what}")
    passed += 1


SWEEP = [
    "gbc-sweep", "--users", "2", "--tx", "2", "--rx", "1",
    "--snr-start", "0", "--snr-stop", "6", "--snr-step", "3",
    "--samples", "2000", "--seed", "11", "--schemes", "TDMA,JSC_FIXED_BETA",
]

# exit code 0, data on stdout only
r = run(SWEEP)
ok(r.returncode == 0, "sweep exit code")
ok(r.stdout.startswith("# bcfeed gbc-sweep"), "sweep stdout has the metadata header")
ok(r.stderr == "", "sweep stderr is quiet on success")
header = "snr_db,scheme,rate_bits,stderr,samples,seed,beta_json,alpha_json"
ok(header in r.stdout, "exact CSV column header")
body = r.stdout.split(header)[1]
ok(len([ln for ln in body.strip().splitlines() if ln]) == 3 * 2, "row count 3 snr x 2 schemes")

# byte-identical rerun
r2 = run(SWEEP)
ok(r.stdout == r2.stdout, "identical flags and seed give byte-identical stdout")

# thread count never changes output
r_t1 = run(SWEEP + ["--threads", "1"])
r_t4 = run(SWEEP + ["--threads", "4"])
ok(r_t1.stdout == r_t4.stdout == r.stdout, "--threads does not change output")

# BCFEED_SEED env overrides --seed
env = dict(os.environ, BCFEED_SEED="11")
r_env = subprocess.run(
    [CLI] + SWEEP[:-4] + ["--seed", "999", "--schemes", "TDMA,JSC_FIXED_BETA"],
    capture_output=True, text=True, env=env, timeout=300,
)
ok(r_env.stdout == r.stdout, "BCFEED_SEED overrides --seed")

# json format round trip shape
r_json = run(SWEEP + ["--format", "json"])
ok(r_json.returncode == 0, "json sweep exit code")
doc = json.loads(r_json.stdout)
ok(doc["format"] == "bcfeed-gbc-sweep", "json format tag")
ok(len(doc["rows"]) == 6, "json row count")

# validation failures: exit 2, diagnostics on stderr, stdout empty
r_bad = run(["gbc-sweep", "--users", "2", "--schemes", "BOGUS", "--samples", "10"])
ok(r_bad.returncode == 2, "unknown scheme exits 2")
ok(r_bad.stdout == "", "no data on stdout for validation errors")
ok("BOGUS" in r_bad.stderr, "stderr names the bad scheme")

r_bad2 = run(["gbc-sweep", "--users", "3", "--tx", "3", "--schemes", "MAT2", "--samples", "10"])
ok(r_bad2.returncode == 2, "MAT2 with K=3 exits 2")

r_bad3 = run(["ebc", "capacity-sym"], stdin='{"deltas": [0.2, 0.5]}')
ok(r_bad3.returncode == 2, "invalid deltas exit 2")

r_bad4 = run(["nope"])
ok(r_bad4.returncode == 2, "unknown subcommand exits 2")

# preset fig2a shape: 14 snr points x 4 schemes
r_preset = run(["gbc-sweep", "--preset", "fig2a", "--samples", "200", "--beta-points", "4"])
ok(r_preset.returncode == 0, "preset run")
rows = [ln for ln in r_preset.stdout.splitlines() if ln and not ln.startswith("#") and ln != header]
ok(len(rows) == 14 * 4, "fig2a emits 14x4 rows")
ok("snr_ref=total" in r_preset.stdout, "fig2a uses the total-power axis")

# dof
r_dof = run(["dof", "--users", "2"])
ok(r_dof.returncode == 0 and r_dof.stdout.startswith("2/3"), "dof text output")
r_dof3 = run(["dof", "--users", "3", "--format", "json"])
d3 = json.loads(r_dof3.stdout)
ok(d3["num"] == 6 and d3["den"] == 11, "dof json output")
r_dof1 = run(["dof", "--users", "1"])
ok(r_dof1.stdout.startswith("1 "), "dof K=1")

# ebc queries
r_cap = run(["ebc", "capacity-sym"], stdin='{"deltas": [0.5, 0.25], "alphabet_bits": 1.0}')
ok(r_cap.returncode == 0, "capacity-sym exit")
ok(abs(json.loads(r_cap.stdout)["sym_rate"] - 0.3) < 1e-12, "capacity-sym value")

r_mu = run(["ebc", "mu-solve"], stdin='{"deltas": [0.5, 0.25]}')
mu = json.loads(r_mu.stdout)["mu"]
ok(abs(mu["1"] - 0.4) < 1e-12 and abs(mu["2"] - 0.4) < 1e-12 and abs(mu["3"] - 0.2) < 1e-12,
   "mu-solve masks 1,2,3")

r_rc = run(["ebc", "region-check"],
           stdin='{"deltas": [0.5, 0.25], "alphabet_bits": 1.0, "rates": [0.31, 0.3]}')
rc = json.loads(r_rc.stdout)
ok(rc["feasible"] is False, "region-check rejects the exterior point")
ok(rc["binding_permutation"] == [1, 2], "violated permutation listed")

feas_in = {
    "deltas": [0.5, 0.25],
    "rates": [0.3, 0.3],
    "params": {
        "K": 2,
        "alphas": [0.8, 0.2],
        "q2": {"1": 0.5, "2": 0.5, "3": 1.0},
        "alphabet_bits": 1.0,
    },
}
r_fe = run(["ebc", "feasible"], stdin=json.dumps(feas_in))
fe = json.loads(r_fe.stdout)
ok(fe["feasible"] is True, "capacity point feasible")
ok(all(abs(c["slack"]) < 1e-9 for c in fe["constraints"]), "constraints tight at capacity")

feas_in["rates"] = [0.301, 0.3]
r_fe2 = run(["ebc", "feasible"], stdin=json.dumps(feas_in))
ok(json.loads(r_fe2.stdout)["feasible"] is False, "above capacity infeasible")

# schema violation carries a JSON pointer
r_schema = run(["ebc", "feasible"], stdin='{"deltas": [0.5, 0.25], "rates": [0.1, 0.1]}')
ok(r_schema.returncode == 2 and "/params" in r_schema.stderr, "schema error names the field")

# feasible accepts a full joint pmf (independent erasures, epsilon = 0.5)
feas_pmf = dict(feas_in)
feas_pmf["rates"] = [0.3, 0.3]
feas_pmf.pop("deltas")
feas_pmf["pmf"] = {"K": 2, "probs": {"0": 0.25, "1": 0.25, "2": 0.25, "3": 0.25}}
r_fe3 = run(["ebc", "feasible"], stdin=json.dumps(feas_pmf))
ok(json.loads(r_fe3.stdout)["feasible"] is True, "full-pmf input accepted")

# --snr-db excludes the range flags
r_excl = run(["gbc-sweep", "--users", "2", "--snr-db", "4", "--snr-start", "0",
              "--samples", "10"])
ok(r_excl.returncode == 2, "--snr-db with --snr-start exits 2")

# dump-grid requires json, and emits per-point tables
r_dump = run(["gbc-sweep", "--users", "2", "--tx", "2", "--rx", "1", "--snr-db", "4",
              "--samples", "500", "--schemes", "JSC", "--beta-points", "5", "--dump-grid"])
ok(r_dump.returncode == 2, "dump-grid with csv exits 2")
r_dump2 = run(["gbc-sweep", "--users", "2", "--tx", "2", "--rx", "1", "--snr-db", "4",
               "--samples", "500", "--schemes", "JSC", "--beta-points", "5", "--dump-grid",
               "--format", "json"])
doc2 = json.loads(r_dump2.stdout)
ok(len(doc2["rows"][0]["opt"]["grid_rates"]) == 5, "dump-grid emits the rate table")

print(f"cli: all {passed} checks passed")
