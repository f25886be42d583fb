"""Run artifacts: genomes.csv encoding/decoding and the manifest."""

import json

import numpy as np
import pytest

from surftrack.sim.config import GridConfig
from surftrack.sim.engine import DeterministicGrid
from surftrack.sim.output import (
    GenomesCsvError,
    genomes_csv_text,
    read_genomes_csv,
    read_manifest,
    write_manifest,
)
from surftrack.surface.annotation import SurfaceAnnotation


def simulate(**overrides):
    base = dict(width=2, height=2, generations=30, population=8, seed=1)
    base.update(overrides)
    cfg = GridConfig(**base)
    eng = DeterministicGrid(cfg)
    eng.run()
    return cfg, eng


def test_round_trip_recovers_every_field():
    cfg, eng = simulate()
    samples = eng.sample_end_state(per_pe=3)
    text = genomes_csv_text(eng.layout, samples)
    rows = read_genomes_csv(text, eng.layout, cfg.policy)
    assert len(rows) == len(samples)
    for row, sample in zip(rows, samples):
        assert (row.pe_x, row.pe_y) == (sample.pe_x, sample.pe_y)
        assert row.label == sample.label
        assert row.founder_tag == sample.fields.founder_tag
        assert row.records.counter == sample.fields.counter
        # record values must match a direct read of the surface
        ann = SurfaceAnnotation(
            cfg.policy,
            cfg.slot_count,
            cfg.differentia_bits,
            counter=sample.fields.counter,
            slots=list(sample.fields.surface),
        )
        assert row.records == ann.to_records()


def test_fitness_layout_round_trip():
    cfg, eng = simulate(layout="fitness", policy="steady", differentia_bits=8)
    samples = eng.sample_end_state(per_pe=2)
    text = genomes_csv_text(eng.layout, samples)
    assert text.splitlines()[0] == "pe_x,pe_y,genome_hex,counter,fitness"
    rows = read_genomes_csv(text, eng.layout, cfg.policy)
    for row, sample in zip(rows, samples):
        assert row.fitness == sample.fields.fitness
        assert row.founder_tag is None


def test_tagged_header_names_the_tag_column():
    cfg, eng = simulate()
    text = genomes_csv_text(eng.layout, eng.sample_end_state())
    assert text.splitlines()[0] == "pe_x,pe_y,genome_hex,counter,founder_tag"


def test_labels_count_rows_per_pe_in_file_order():
    cfg, eng = simulate()
    samples = eng.sample_end_state(per_pe=2)
    rows = read_genomes_csv(genomes_csv_text(eng.layout, samples), eng.layout, cfg.policy)
    assert [r.label for r in rows] == [
        f"pe{x}_{y}_{j}" for y in range(2) for x in range(2) for j in range(2)
    ]


def test_counter_column_must_agree_with_the_packed_genome():
    cfg, eng = simulate()
    text = genomes_csv_text(eng.layout, eng.sample_end_state())
    lines = text.splitlines()
    cells = lines[1].split(",")
    cells[3] = str(int(cells[3]) + 1)
    tampered = "\n".join([lines[0], ",".join(cells), *lines[2:]]) + "\n"
    with pytest.raises(GenomesCsvError, match="row 2: counter column says"):
        read_genomes_csv(tampered, eng.layout, cfg.policy)


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("", "row 1: empty file"),
        ("pe_x,pe_y,counter\n", "missing required column 'genome_hex'"),
        (
            "pe_x,pe_y,genome_hex,counter\n0,0,zz,0\n",
            "row 2",
        ),
        (
            "pe_x,pe_y,genome_hex,counter\n0,0,ab,0\n",
            "row 2",
        ),
    ],
)
def test_malformed_rows_name_their_row(text, fragment):
    layout = GridConfig(width=1, height=1, generations=1).genome_layout()
    with pytest.raises(GenomesCsvError, match=fragment):
        read_genomes_csv(text, layout, "tilted")


def test_blank_lines_are_skipped():
    cfg, eng = simulate()
    text = genomes_csv_text(eng.layout, eng.sample_end_state())
    padded = text.replace("\n", "\n\n", 1)
    rows = read_genomes_csv(padded, eng.layout, cfg.policy)
    assert len(rows) == 4


def test_manifest_round_trip(tmp_path):
    cfg = GridConfig(width=2, height=2, generations=30, population=8, seed=1)
    path = str(tmp_path / "manifest.json")
    write_manifest(
        path,
        cfg,
        mode="deterministic",
        outputs={"genomes": "genomes.csv"},
        duration_seconds=1.23456,
    )
    data = read_manifest(path)
    assert data["mode"] == "deterministic"
    assert data["outputs"] == {"genomes": "genomes.csv"}
    assert data["duration_seconds"] == 1.235
    assert GridConfig.from_dict(data["config"]) == cfg
    assert not (tmp_path / "manifest.json.tmp").exists()


def test_manifest_is_valid_json_text(tmp_path):
    cfg = GridConfig(width=1, height=1, generations=5)
    path = str(tmp_path / "m.json")
    write_manifest(path, cfg, "threaded", {}, 0.0)
    raw = (tmp_path / "m.json").read_text()
    assert raw.endswith("\n")
    assert json.loads(raw)["config"]["width"] == 1
