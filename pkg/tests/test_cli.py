import json
import subprocess
import sys

import pytest

from tabular_oal import cli, harness
from tabular_oal.envs import ChainSpec, stochastic_chain
from tabular_oal.mdp_core import save_mdp


def opts_for(argv):
    args = cli.build_parser().parse_args(argv)
    return args, cli.resolve_options(args)


def test_presets_and_flags():
    args, opts = opts_for(["chain", "--alphas", "0.05,0.4", "--trajectories", "1,2", "--no-explore"])
    spec = cli.spec_from_options(args.command, opts)
    assert spec.alpha_values == (0.05, 0.4)
    assert spec.N_values == (1, 2)
    assert spec.variants == ("no-ucb",)
    assert spec.config.K == 10000 and spec.config.bonus_scale == harness.DEFAULT_BONUS_SCALE

    args, opts = opts_for(["chain", "--bc-init", "--expert-model-init", "--alpha", "0.1"])
    spec = cli.spec_from_options(args.command, opts)
    assert spec.variants == ("ucb+both", "no-ucb+both")
    assert spec.alpha_values == (0.1,)

    args, opts = opts_for(["fifty", "--bc-compare"])
    spec = cli.spec_from_options(args.command, opts)
    assert spec.variants == ("bc-only", "oal-bc-init")
    assert spec.N_values == (1, 10, 50, 5000)


def test_config_file_then_flags(tmp_path):
    (tmp_path / "cfg.json").write_text(json.dumps({"seeds": 7, "episodes": 300, "bonus-scale": 0.01}))
    args, opts = opts_for(["chain", "--config", str(tmp_path / "cfg.json"), "--seeds", "3"])
    spec = cli.spec_from_options(args.command, opts)
    assert spec.seeds == 3
    assert spec.config.K == 300 and spec.config.bonus_scale == 0.01
    (tmp_path / "bad.json").write_text(json.dumps({"sedes": 7}))
    with pytest.raises(SystemExit):
        opts_for(["chain", "--config", str(tmp_path / "bad.json")])


def test_chain_run_writes_outputs(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code = cli.main(["chain", "--horizon", "5", "--episodes", "40", "--trajectories", "1,3", "--seeds", "2",
                     "--eval-every", "20", "--jobs", "1", "--out", str(out), "--svg", str(tmp_path / "r.svg")])
    assert code == 0
    rows = harness.read_csv(out)
    assert {r.variant for r in rows} == {"ucb", "no-ucb"}
    assert (tmp_path / "r.raw.csv").exists()
    assert (tmp_path / "r.svg").read_text().startswith("<svg")
    assert "final regret" in capsys.readouterr().out


def test_custom_run_and_bad_spec(tmp_path):
    mdp, expert = stochastic_chain(ChainSpec(horizon=4, alpha=0.3))
    save_mdp(mdp, tmp_path / "m.json", expert)
    out = tmp_path / "c.csv"
    assert cli.main(["custom", "--mdp", str(tmp_path / "m.json"), "--episodes", "10", "--seeds", "1",
                     "--trajectories", "2", "--jobs", "1", "--out", str(out)]) == 0
    assert harness.read_csv(out)[-1].episode == 10
    assert cli.main(["chain", "--seeds", "0", "--out", str(out)]) == 2


def test_selftest_subprocess():
    proc = subprocess.run([sys.executable, "-m", "tabular_oal", "selftest"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    lines = proc.stdout.strip().splitlines()
    assert len(lines) == 5 and all(line.startswith("PASS") for line in lines)
