from aeronet_ctr.experiment import ExperimentPlan, run_experiment
from aeronet_ctr.plotting import plot_distance, plot_experiment, plot_link_timeline
from aeronet_ctr.scenario import Area, generate_random_scenario
from aeronet_ctr.timeline import build_link_timeline


def test_figures_written(tmp_path):
    sc = generate_random_scenario(4, 10, 20, Area(120, 120), 2)
    plot_link_timeline(build_link_timeline(sc, 50), tmp_path / "links.png")
    plot_distance(sc, 0, 1, 50, tmp_path / "dist.png")
    plan = ExperimentPlan("node_count", (3, 4), 2, area=Area(200, 200), metrics=("ctr",))
    plot_experiment(run_experiment(plan), tmp_path / "trend.png", title="CTR")
    for name in ("links.png", "dist.png", "trend.png"):
        assert (tmp_path / name).read_bytes()[:4] == b"\x89PNG"
