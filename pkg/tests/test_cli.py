from __future__ import annotations

import csv
import io
import math
import os
import time
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from tempfile import TemporaryDirectory

import numpy as np

from drift_app.cli import build_parser, run_cli
from drift_app.models import MEASURES, BibRecord

from synthetic_corpus import FIELD_SHAPES, drifting_records, table_expected, table_records, write_corpus

SMALL_FIELDS = {field: FIELD_SHAPES[field] for field in ("ES", "MI")}


def _run(argv: list[str]) -> tuple[int, str, str]:
    out = io.StringIO()
    err = io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = run_cli(argv)
    return code, out.getvalue(), err.getvalue()


def _rows(path: Path) -> list[list[str]]:
    with path.open(newline="", encoding="utf-8") as handle:
        return list(csv.reader(handle))


class ParserTests(unittest.TestCase):
    def test_periods_and_fields_are_parsed(self) -> None:
        args = build_parser().parse_args(
            ["evolve", "--input", "a.tsv", "--fields", "ES, MI,ES", "--periods", "1991:2000,2001:2010", "--years", "1991:2019"]
        )
        self.assertEqual(args.fields, ("ES", "MI"))
        self.assertEqual(args.periods, ((1991, 2000), (2001, 2010)))
        self.assertEqual(args.years, (1991, 2019))
        self.assertEqual(args.workers, 1)

    def test_version_names_the_tool(self) -> None:
        code, stdout, _ = _run(["--version"])
        self.assertEqual(code, 0)
        self.assertTrue(stdout.startswith("FieldDrift "))
        self.assertIn("FieldDrift:", build_parser().description)

    def test_unknown_flag_is_usage_error(self) -> None:
        code, _, err = _run(["evolve", "--input", "a.tsv", "--colour"])
        self.assertEqual(code, 2)
        self.assertIn("--colour", err)

    def test_empty_year_range_is_usage_error(self) -> None:
        code, _, err = _run(["dissim", "--input", "a.tsv", "--years", "2000:1995"])
        self.assertEqual(code, 2)
        self.assertIn("empty year range", err)

    def test_single_year_period_is_usage_error(self) -> None:
        code, _, err = _run(["evolve", "--input", "a.tsv", "--periods", "2000:2000"])
        self.assertEqual(code, 2)
        self.assertIn("contains no year pairs", err)

    def test_worker_bounds(self) -> None:
        code, _, _ = _run(["dissim", "--input", "a.tsv", "--workers", "0"])
        self.assertEqual(code, 2)

    def test_pair_only_on_dissim(self) -> None:
        code, _, _ = _run(["evolve", "--input", "a.tsv", "--pair", "2000:2001"])
        self.assertEqual(code, 2)


class CommandTests(unittest.TestCase):
    def setUp(self) -> None:
        self._tmp = TemporaryDirectory()
        self.root = Path(self._tmp.name)
        self.corpus = write_corpus(self.root / "corpus.tsv", drifting_records(SMALL_FIELDS, 1991, 2000))

    def tearDown(self) -> None:
        self._tmp.cleanup()

    def test_evolve_writes_pipeline_outputs(self) -> None:
        out_dir = self.root / "out"
        code, stdout, _ = _run(
            ["evolve", "--input", str(self.corpus), "--fields", "ES,MI", "--years", "1991:2000", "--out", str(out_dir)]
        )
        self.assertEqual(code, 0)
        names = sorted(path.name for path in out_dir.iterdir())
        self.assertEqual(names, ["dissimilarity.csv", "evolution.csv", "pca_loadings.csv", "pca_scree.csv", "speed.csv"])
        self.assertEqual(len(stdout.splitlines()), 5)

        dissimilarity = _rows(out_dir / "dissimilarity.csv")
        self.assertEqual(len(dissimilarity), 1 + 2 * 9)
        evolution = _rows(out_dir / "evolution.csv")
        self.assertEqual(evolution[0], ["field", "year_from", "year_to", "raw_pc1", "dissimilarity"])
        self.assertEqual(min(float(row[4]) for row in evolution[1:]), 0.0)
        speed = _rows(out_dir / "speed.csv")
        self.assertEqual([row[:3] for row in speed[1:]], [["ES", "1991", "2000"], ["MI", "1991", "2000"]])
        loadings = _rows(out_dir / "pca_loadings.csv")
        manhattan = next(row for row in loadings if row[0] == "manhattan")
        self.assertGreater(float(manhattan[1]), 0.0)

    def test_report_is_byte_identical_across_runs(self) -> None:
        first = self.root / "first"
        second = self.root / "second"
        for out_dir in (first, second):
            code, _, _ = _run(["report", "--input", str(self.corpus), "--out", str(out_dir)])
            self.assertEqual(code, 0)

        names = sorted(path.name for path in first.iterdir())
        self.assertEqual(names, sorted(path.name for path in second.iterdir()))
        for name in (
            "corpus_stats.csv",
            "correlation.csv",
            "measure_summary.csv",
            "speed_ranking.csv",
            "scatter_clark_czekanowski.csv",
        ):
            self.assertIn(name, names)
        for name in names:
            with self.subTest(name=name):
                self.assertEqual((first / name).read_bytes(), (second / name).read_bytes())

    def test_parallel_run_matches_serial(self) -> None:
        serial = self.root / "serial"
        parallel = self.root / "parallel"
        self.assertEqual(_run(["dissim", "--input", str(self.corpus), "--out", str(serial)])[0], 0)
        self.assertEqual(_run(["dissim", "--input", str(self.corpus), "--out", str(parallel), "--workers", "2"])[0], 0)
        self.assertEqual(
            (serial / "dissimilarity.csv").read_bytes(),
            (parallel / "dissimilarity.csv").read_bytes(),
        )

    def test_ingest_writes_filtered_records(self) -> None:
        out_dir = self.root / "ingest"
        code, _, _ = _run(
            ["ingest", "--input", str(self.corpus), "--fields", "MI", "--years", "1995:1996", "--out", str(out_dir)]
        )
        self.assertEqual(code, 0)
        lines = (out_dir / "records.tsv").read_text(encoding="utf-8").splitlines()
        self.assertEqual(lines[0], "id\tyear\tfield\tkeywords")
        self.assertTrue(all(line.split("\t")[2] == "MI" for line in lines[1:]))
        self.assertEqual({line.split("\t")[1] for line in lines[1:]}, {"1995", "1996"})

    def test_stats_command(self) -> None:
        out_dir = self.root / "stats"
        code, _, _ = _run(["stats", "--input", str(self.corpus), "--out", str(out_dir)])
        self.assertEqual(code, 0)
        rows = _rows(out_dir / "corpus_stats.csv")
        self.assertEqual(rows[1][:4], ["ES", "period", "1991", "2000"])

    def test_pair_and_distribution_dump(self) -> None:
        table = write_corpus(self.root / "table.tsv", table_records(2000, 2005))
        out_dir = self.root / "pair"
        code, _, _ = _run(
            ["dissim", "--input", str(table), "--pair", "2000:2005", "--out", str(out_dir)]
        )
        self.assertEqual(code, 0)
        rows = _rows(out_dir / "dissimilarity_2000_2005.csv")
        self.assertEqual(rows[1][:3], ["ES", "2000", "2005"])
        expected = table_expected()
        for measure in MEASURES:
            self.assertTrue(math.isclose(float(rows[1][3 + measure.column]), expected[measure], rel_tol=1e-9, abs_tol=1e-12))

        dump_dir = self.root / "dump"
        code, _, _ = _run(
            ["dissim", "--input", str(self.corpus), "--fields", "ES", "--years", "1991:1992",
             "--dump-distributions", "--out", str(dump_dir)]
        )
        self.assertEqual(code, 0)
        self.assertEqual(sorted(p.name for p in (dump_dir / "distributions").iterdir()), ["ES_1991.csv", "ES_1992.csv"])

    def test_jsonl_input(self) -> None:
        jsonl = write_corpus(self.root / "corpus.jsonl", drifting_records(SMALL_FIELDS, 1991, 1994), "jsonl")
        out_dir = self.root / "jsonl"
        code, _, _ = _run(["dissim", "--input", str(jsonl), "--format", "jsonl", "--out", str(out_dir)])
        self.assertEqual(code, 0)
        self.assertEqual(len(_rows(out_dir / "dissimilarity.csv")), 1 + 2 * 3)

    def test_report_on_short_range_skips_correlation(self) -> None:
        short = write_corpus(self.root / "short.tsv", drifting_records(SMALL_FIELDS, 1991, 1993))
        out_dir = self.root / "short"
        code, _, err = _run(["report", "--input", str(short), "--out", str(out_dir)])
        self.assertEqual(code, 0)
        self.assertIn("Skipping correlation for field ES", err)
        self.assertEqual(_rows(out_dir / "correlation.csv"), [["field", "measure", *(m.label for m in MEASURES)]])
        self.assertEqual(len(_rows(out_dir / "dissimilarity.csv")), 1 + 2 * 2)
        self.assertTrue((out_dir / "scatter_clark_czekanowski.csv").exists())

    def test_log_file(self) -> None:
        log_path = self.root / "logs" / "run.log"
        code, _, _ = _run(["dissim", "--input", str(self.corpus), "--out", str(self.root / "o"), "--log-file", str(log_path)])
        self.assertEqual(code, 0)
        text = log_path.read_text(encoding="utf-8")
        self.assertIn("Command dissim started.", text)
        self.assertIn("Process RSS end", text)


class FailureTests(unittest.TestCase):
    def test_empty_year_exits_with_data_error(self) -> None:
        with TemporaryDirectory() as tmp:
            root = Path(tmp)
            records = table_records() + [BibRecord("x", 2002, "ES", ())]
            corpus = write_corpus(root / "corpus.tsv", records)
            code, stdout, err = _run(["dissim", "--input", str(corpus), "--out", str(root / "out")])
        self.assertEqual(code, 1)
        self.assertEqual(stdout, "")
        self.assertIn("No keywords in field 'ES' for year 2002", err)

    def test_failed_analysis_writes_nothing(self) -> None:
        with TemporaryDirectory() as tmp:
            root = Path(tmp)
            corpus = write_corpus(root / "corpus.tsv", table_records(1991, 1992))
            code, _, err = _run(["report", "--input", str(corpus), "--out", str(root / "out")])
            self.assertEqual(code, 1)
            self.assertFalse((root / "out").exists())
        self.assertIn("ERROR", err)

    def test_missing_input_file(self) -> None:
        with TemporaryDirectory() as tmp:
            code, _, err = _run(["stats", "--input", str(Path(tmp) / "absent.tsv")])
        self.assertEqual(code, 1)
        self.assertIn("FileNotFoundError", err)

    def test_strict_mode_fails_on_bad_record(self) -> None:
        with TemporaryDirectory() as tmp:
            corpus = Path(tmp) / "corpus.tsv"
            corpus.write_text("id\tyear\tfield\tkeywords\nA\t2000\tES\tx\nB\tnope\tES\ty\n", encoding="utf-8")
            lenient, _, _ = _run(["ingest", "--input", str(corpus), "--out", str(Path(tmp) / "a")])
            strict, _, err = _run(["ingest", "--input", str(corpus), "--strict", "--out", str(Path(tmp) / "b")])
        self.assertEqual(lenient, 0)
        self.assertEqual(strict, 1)
        self.assertIn("invalid year", err)


@unittest.skipUnless(os.environ.get("DRIFT_SCALE_TESTS") == "1", "set DRIFT_SCALE_TESTS=1 to run")
class ScaleTests(unittest.TestCase):
    def test_large_corpus(self) -> None:
        rng = np.random.default_rng(2019)
        fields = ("ES", "ILS", "MI", "RE")
        lines = ["id\tyear\tfield\tkeywords"]
        for index in range(300_000):
            field = fields[index % 4]
            year = 1991 + (index // 4) % 29
            base = (year - 1991) * 40
            picks = rng.integers(base, base + 4000, size=5)
            lines.append(f"R{index}\t{year}\t{field}\t" + ";".join(f"kw{pick}" for pick in picks))
        with TemporaryDirectory() as tmp:
            corpus = Path(tmp) / "big.tsv"
            corpus.write_text("\n".join(lines) + "\n", encoding="utf-8")
            first = Path(tmp) / "first"
            second = Path(tmp) / "second"
            started = time.perf_counter()
            self.assertEqual(_run(["report", "--input", str(corpus), "--workers", "4", "--out", str(first)])[0], 0)
            self.assertLess(time.perf_counter() - started, 60.0)
            self.assertEqual(_run(["report", "--input", str(corpus), "--out", str(second)])[0], 0)
            self.assertEqual(len(_rows(first / "dissimilarity.csv")), 1 + 112)
            for path in sorted(first.iterdir()):
                self.assertEqual(path.read_bytes(), (second / path.name).read_bytes())


if __name__ == "__main__":
    unittest.main()
