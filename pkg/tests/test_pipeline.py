"""Acceptance runs of the full pipeline on the bundled scenarios."""

import numpy as np
import pytest

from morsepi.crocodile.functorial import base_path, transport_base
from morsepi.crocodile.walk import DOWNWARD, UPWARD, downward_walk, upward_walk
from morsepi.exceptions import RegularityError, ValidationError
from morsepi.factory import create_pipeline
from morsepi.moduli.dimensions import boundary_violations
from morsepi.moduli.types import ZeroLength
from morsepi.relations.oracle_compare import INJECTIVE
from morsepi.report import EXIT_OK, EXIT_VERDICT
from morsepi.steps.operations import evaluate, project_path

pytestmark = pytest.mark.slow


@pytest.fixture
def make_pipeline(scenario_dir, tmp_path, event_bus):
    """Factory for pipelines on bundled scenarios with a recording event bus."""

    def _make(name: str, **overrides):
        pipeline = create_pipeline(scenario_dir / f"{name}.scn", output_dir=tmp_path / name, **overrides)
        pipeline.event_bus = event_bus
        return pipeline

    return _make


async def test_circle_product_critical_and_moduli(make_pipeline):
    """Test critical points and connecting arcs for the product metric."""
    pipeline = make_pipeline("circle_product")

    report = await pipeline.run("moduli")

    assert [(c.id, c.shifted_index) for c in report.critical_points] == [("c0", 0), ("c1", 1)]
    assert len(report.inventory.connecting[("c1", "c0")]) == 2
    assert report.exit_status == EXIT_OK


async def test_circle_product_components_reach_broken_ends(make_pipeline):
    """Test that the star line and both branches of M(c1, M) end broken at c0."""
    pipeline = make_pipeline("circle_product")
    inventory = (await pipeline.run("moduli")).inventory

    [star_arc] = inventory.star_arcs["c0"]
    assert star_arc.parameter == pytest.approx(0.0, abs=1e-9)

    distinguished = inventory.distinguished
    assert distinguished.complete
    assert [type(b).__name__ for b in distinguished.boundary] == ["ZeroLength", "BrokenConfiguration"]
    assert distinguished.boundary[1].beta == star_arc.id

    through_c1 = inventory.point_components["c1"][0]
    assert through_c1.complete
    assert [b.alpha for b in through_c1.boundary] == ["c0#0", "c0#0"]
    assert {b.beta for b in through_c1.boundary} == {a.id for a in inventory.connecting[("c1", "c0")]}
    times = [s.parameter[1] for s in through_c1.samples]
    assert max(times) > pipeline.settings.numerics.broken_dwell


async def test_circle_product_group(make_pipeline, event_bus):
    """Test that the product circle yields Z and passes every check."""
    report = await make_pipeline("circle_product").run("pi1")

    assert report.verdict.passed
    assert report.verdict.group == "Z"
    assert report.multiplicity.holds
    assert event_bus.of_type("critical.found")
    assert event_bus.of_type("walk.completed")
    assert len(event_bus.of_type("relations.verdict")) == 1


async def test_circle_folded_has_four_arcs(make_pipeline):
    """Test that the folded metric doubles the connecting arcs."""
    report = await make_pipeline("circle_folded").run("moduli")

    assert len(report.inventory.connecting[("c1", "c0")]) == 4


async def test_circle_folded_needs_contraction_relators(make_pipeline):
    """Test the negative control: without contraction relators the map is not injective."""
    report = await make_pipeline("circle_folded").run("pi1", include_type2=False)

    assert not report.verdict.passed
    assert report.verdict.failing == INJECTIVE
    assert report.presentation.abelian.rank >= 2
    assert report.exit_status == EXIT_VERDICT


async def test_circle_folded_group(make_pipeline):
    """Test that contraction relators cut the folded circle down to Z."""
    report = await make_pipeline("circle_folded").run("pi1")

    assert report.verdict.passed
    assert report.verdict.group == "Z"
    assert any(r.kind == "type2" for r in report.relators)
    assert max(report.multiplicity.per_point.values()) >= 2
    patches = [p for line in report.lines_of_patches for p in line.patches]
    assert patches
    for patch in patches:
        for path in patch.paths:
            assert path.samples and len(path.samples) == len(path.times)


async def test_torus_group(make_pipeline):
    """Test the torus presentation against Z^2."""
    report = await make_pipeline("torus").run("pi1")

    assert report.verdict.passed
    assert report.verdict.group == "Z^2"


async def test_sphere_group(make_pipeline):
    """Test that the sphere gives the trivial group."""
    report = await make_pipeline("sphere").run("pi1")

    assert report.verdict.passed
    assert report.verdict.group == "1"


async def test_identity_push_is_consistent(make_pipeline):
    """Test that pushing generators along the identity keeps their classes."""
    report = await make_pipeline("circle_product").run("push", map_name="identity")

    assert report.pushes
    assert all(p.consistent for p in report.pushes)


async def test_artifacts_written(make_pipeline, tmp_path):
    """Test the artifact tree of a pi1 run."""
    pipeline = make_pipeline("circle_product")
    report = await pipeline.run("pi1")
    report.write(pipeline.settings.output_dir)

    out = tmp_path / "circle_product"
    for name in ("report.txt", "presentation.txt", "relators.csv", "timing.txt"):
        assert (out / name).exists()
    assert (out / "components" / "manifest.yaml").exists()
    assert list((out / "walks").glob("oracle_*.txt"))


async def test_transport_along_a_short_path(make_pipeline):
    """Test that conjugating by an out-and-back path keeps the class of each generator loop."""
    pipeline = make_pipeline("circle_product")
    ctx = await pipeline.prepare()
    base = ctx.data.base_point
    path = np.array([base, base + 0.05, base])

    for index in ctx.table.generators:
        loop = ctx.table.fundamental_loop(index)
        _, theta = transport_base(ctx.inventory, ctx.table, ctx.walker, path, loop)
        assert evaluate(theta, ctx.table, ctx.data, ctx.tri, ctx.oracle) == evaluate(
            loop, ctx.table, ctx.data, ctx.tri, ctx.oracle
        )

    with pytest.raises(ValidationError):
        transport_base(ctx.inventory, ctx.table, ctx.walker, np.array([base + 0.5, base]), loop)


async def test_double_cover_push_squares_the_generator(make_pipeline):
    """Test that the double cover sends the generator of the circle to its square."""
    pipeline = make_pipeline("circle_product")

    report = await pipeline.run("push", map_name="double-cover")

    [push] = report.pushes
    assert len(push.source_class) == 1
    assert push.expected_class == push.source_class * 2
    assert push.consistent
    image = report.table.to_generators(push.theta)
    assert len(image) == 2 and image[0] == image[1]


async def test_transport_to_a_distinct_base_point(make_pipeline):
    """Test that transport to data based at another point and back keeps each class."""
    pipeline = make_pipeline("circle_product")
    ctx = await pipeline.prepare()
    model = ctx.data.model
    moved = model.normalize(ctx.data.base_point + 0.3)
    inventory, table, walker = await pipeline.rebased(moved)
    there = base_path(model, ctx.data.base_point, moved)

    assert walker.data.base_point == pytest.approx(moved)
    for index in ctx.table.generators:
        loop = ctx.table.fundamental_loop(index)
        _, moved_theta = transport_base(ctx.inventory, ctx.table, walker, there, loop)
        assert len(table.to_generators(moved_theta.word)) == 1

        _, theta = transport_base(inventory, table, ctx.walker, there[::-1], moved_theta)
        assert evaluate(theta, ctx.table, ctx.data, ctx.tri, ctx.oracle) == evaluate(
            loop, ctx.table, ctx.data, ctx.tri, ctx.oracle
        )


async def test_walk_functions_match_the_walkers(make_pipeline):
    """Test the free walk functions against the prepared walkers."""
    pipeline = make_pipeline("circle_product")
    ctx = await pipeline.prepare()
    walk = (await pipeline.walk_oracle_loops())[0]

    transcript, theta = downward_walk(ctx.inventory, ctx.table, walk.transcript.loop, pipeline.settings)
    assert theta.word == walk.theta
    assert transcript.direction == DOWNWARD

    aux = ctx.up_walker.data.base_point
    out_and_back = np.array([aux, aux + 0.05, aux])
    up_transcript, co_word = upward_walk(pipeline.aux_inventory, pipeline.co_table, out_and_back, pipeline.settings)
    assert up_transcript.direction == UPWARD
    assert up_transcript.base == ctx.up_walker.data.base_label
    assert pipeline.co_table.to_generators(co_word.word) == ()


@pytest.mark.parametrize("name", ["circle_product", "circle_folded", "torus", "sphere"])
async def test_traced_components_satisfy_boundary_formulas(make_pipeline, name):
    """Test every traced component against the boundary formula of its space."""
    inventory = (await make_pipeline(name).run("moduli")).inventory
    index_of = {c.id: c.shifted_index for c in inventory.critical_points}

    components = inventory.all_components()
    assert components
    for component in components:
        assert boundary_violations(component, index_of) == [], component.id

    zero_length = [
        c for c in inventory.star_components if any(isinstance(b, ZeroLength) for b in c.boundary)
    ]
    assert len(zero_length) == 1
    assert zero_length[0].distinguished


async def test_random_loops_walk_to_their_class(make_pipeline):
    """Test on random based loops that the walked word evaluates to the loop's own class."""
    pipeline = make_pipeline("circle_product")
    ctx = await pipeline.prepare()
    model = ctx.data.model
    base = float(ctx.data.base_point[0])
    rng = np.random.default_rng(2024)
    t = np.linspace(0.0, 1.0, 161)

    walked = 0
    for _ in range(30):
        winding = int(rng.integers(-2, 3))
        wiggle = sum(rng.normal(0.0, 0.6) * np.sin(np.pi * k * t) for k in range(1, 4))
        points = model.descend((base + 2.0 * np.pi * winding * t + wiggle)[:, None])
        try:
            _, theta = ctx.walker.walk(points)
        except RegularityError:
            continue
        expected = project_path(model, ctx.tri, ctx.oracle, points)
        assert len(expected) == abs(winding)
        assert evaluate(theta, ctx.table, ctx.data, ctx.tri, ctx.oracle) == expected
        walked += 1

    assert walked >= 20
