import subprocess
import sys

import pytest
from scipy import stats

from circmanova import cli


def _write(path, text):
    path.write_text(text)
    return str(path)


@pytest.fixture
def toy_csv(tmp_path):
    return _write(tmp_path / "toy.csv", "g,x\na,0\na,2\nb,1\nb,3\n")


class TestTestCommand:
    def test_toy_lambda(self, toy_csv, capsys):
        assert cli.main(["test", toy_csv]) == 0
        out = capsys.readouterr().out
        assert "Lambda: 0.8\n" in out
        pval = float(out.split("p-value: ")[1].split()[0])
        assert 0 <= pval <= 1

    def test_raw(self, toy_csv, capsys):
        assert cli.main(["test", toy_csv, "--raw", "--method", "asymptotic"]) == 0
        assert "Lambda: 0.8" in capsys.readouterr().out

    def test_p_value_matches_beta(self, toy_csv, capsys):
        # p = 1, q = 2: Lambda ~ Beta((n-2)/2, 1/2)
        cli.main(["test", toy_csv, "--raw"])
        out = capsys.readouterr().out
        pval = float(out.split("p-value: ")[1].split()[0])
        assert pval == pytest.approx(stats.beta.cdf(0.8, 1.0, 0.5), abs=1e-8)

    def test_labels_by_first_appearance(self, tmp_path, capsys):
        path = _write(tmp_path / "d.csv", "z,1,2\ny,0,1\nz,3,1\ny,2,2\nz,0,0\n")
        cli.main(["test", path])
        assert "groups: z (n=3), y (n=2)" in capsys.readouterr().out

    @pytest.mark.parametrize(
        "text",
        [
            "a,1\na,2\na,3\n",
            "a,1,2\nb,3\n",
            "a,1\nb,x\na,2\n",
            "a,1\nb,2\n",
        ],
        ids=["single-group", "ragged", "non-numeric", "n-not-above-q"],
    )
    def test_data_errors(self, tmp_path, text, capsys):
        assert cli.main(["test", _write(tmp_path / "bad.csv", text)]) == 2
        assert capsys.readouterr().err.startswith("error:")

    def test_missing_file(self, tmp_path):
        assert cli.main(["test", str(tmp_path / "nope.csv")]) == 2

    def test_degenerate_is_numeric(self, tmp_path):
        path = _write(tmp_path / "d.csv", "a,1,1\na,1,1\nb,0,0\nb,0,0\n")
        assert cli.main(["test", path]) == 3


class TestQuantileCommand:
    def _value(self, out):
        return float(out.split("Lambda quantile: ")[1].split()[0])

    def test_p1_beta(self, capsys):
        assert cli.main(["quantile", "--n", "9", "--q", "3", "--p", "1", "--alpha", "0.05", "--raw"]) == 0
        assert self._value(capsys.readouterr().out) == pytest.approx(stats.beta.ppf(0.05, 3.0, 1.0), abs=1e-8)

    def test_point_mass_mixture(self, capsys):
        cli.main(["quantile", "--n", "10", "--q", "3", "--p", "6", "--raw"])
        fixed = self._value(capsys.readouterr().out)
        cli.main(["quantile", "--q", "3", "--p", "6", "--method", "mixture", "--count", "point:10", "--raw"])
        assert self._value(capsys.readouterr().out) == pytest.approx(fixed, rel=1e-9)

    def test_median_round_trip(self, capsys):
        from circmanova import nulldist as nd

        cli.main(["quantile", "--n", "8", "--q", "2", "--p", "5", "--alpha", "0.5", "--raw"])
        z = self._value(capsys.readouterr().out)
        assert nd.cdf_lambda(nd.beta_product_model(8, 2, 5), z) == pytest.approx(0.5, abs=1e-8)

    @pytest.mark.parametrize(
        "argv",
        [
            ["quantile", "--n", "3", "--q", "3", "--p", "4"],
            ["quantile", "--n", "10", "--q", "3", "--p", "4", "--alpha", "1.5"],
            ["quantile", "--q", "3", "--p", "4", "--method", "mixture"],
            ["quantile", "--q", "3", "--p", "4", "--method", "mixture", "--count", "zipf:2"],
        ],
    )
    def test_invalid(self, argv):
        assert cli.main(argv) == 2


class TestSimulateCommand:
    CONFIG = "p=8\nnk=4,4\ndist=normal\nsigma=circular-corr:0.108,0.216\nreps=60\nalpha_list=0.05\n"

    def test_h0_csv_shape(self, tmp_path, capsys):
        cfg = _write(tmp_path / "c.cfg", self.CONFIG)
        out = tmp_path / "o.csv"
        assert cli.main(["simulate", cfg, "--output", str(out), "--seed", "3"]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "scenario,test,source,alpha,rate,se,R,seed"
        assert len(lines) == 1 + 6  # lrt exact/asymp + 4 competitors, one alpha
        assert "scenario: p=8;" in capsys.readouterr().out

    def test_h1_adds_simul_rows(self, tmp_path):
        cfg = _write(tmp_path / "c.cfg", self.CONFIG + "shift=0.5,-0.5\ntests=lrt,schott\n")
        out = tmp_path / "o.csv"
        assert cli.main(["simulate", cfg, "--output", str(out), "--seed", "3"]) == 0
        text = out.read_text()
        assert text.count(";H0,") == 3 and text.count(";H1;") == 5

    def test_repeatable(self, tmp_path):
        cfg = _write(tmp_path / "c.cfg", self.CONFIG)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        cli.main(["simulate", cfg, "--output", str(a), "--seed", "5"])
        cli.main(["simulate", cfg, "--output", str(b), "--seed", "5", "--threads", "2"])
        assert a.read_bytes() == b.read_bytes()

    def test_seed_in_config(self, tmp_path):
        cfg = _write(tmp_path / "c.cfg", self.CONFIG + "seed=4\n")
        assert cli.main(["simulate", cfg, "--output", str(tmp_path / "o.csv")]) == 0

    def test_seed_required(self, tmp_path, capsys):
        cfg = _write(tmp_path / "c.cfg", self.CONFIG)
        assert cli.main(["simulate", cfg, "--output", str(tmp_path / "o.csv")]) == 2
        assert "seed" in capsys.readouterr().err

    def test_unknown_key(self, tmp_path, capsys):
        cfg = _write(tmp_path / "c.cfg", self.CONFIG + "colour=blue\n")
        assert cli.main(["simulate", cfg, "--output", str(tmp_path / "o.csv"), "--seed", "1"]) == 2
        assert "colour" in capsys.readouterr().err

    def test_chen_qin_three_groups(self, tmp_path, capsys):
        cfg = _write(tmp_path / "c.cfg", "p=6\nnk=3,3,3\ntests=lrt,chen_qin\nreps=10\n")
        assert cli.main(["simulate", cfg, "--output", str(tmp_path / "o.csv"), "--seed", "1"]) == 2
        assert "q=2" in capsys.readouterr().err

    def test_text_format_and_skew(self, tmp_path):
        cfg = _write(
            tmp_path / "c.cfg",
            "p=6\nnk=5,5\ndist=skewt\nnu=5\nslant=2\nsigma=compound:1,0.3\nreps=20\nformat=text\ntests=lrt,zhang\n",
        )
        out = tmp_path / "o.txt"
        assert cli.main(["simulate", cfg, "--output", str(out), "--seed", "1"]) == 0
        assert out.read_text().startswith("# p=6;q=2;nk=5-5;dist=skewt;nu=5")


class TestUsage:
    def test_unknown_command(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["frobnicate"])
        assert exc.value.code == 4

    def test_missing_required_flag(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["quantile", "--n", "10"])
        assert exc.value.code == 4

    def test_module_entry_point(self, toy_csv):
        res = subprocess.run([sys.executable, "-m", "circmanova", "test", toy_csv], capture_output=True, text=True)
        assert res.returncode == 0 and "Lambda: 0.8" in res.stdout
