"""
Plot Commands
=============

Re-renders the SVG charts of a run from its metrics CSV.
"""

from pathlib import Path

from services.plot_service import write_plots

from .train_commands import smoothing_factor


def run_plot(args) -> int:
    """Handle ``qsmiles plot``."""
    out_dir = args.out or str(Path(args.metrics).parent)
    for path in write_plots(args.metrics, out_dir, args.smooth):
        print(f"plot: {path}")
    return 0


def setup(subparsers):
    """Register the plot subcommand."""
    parser = subparsers.add_parser(
        "plot",
        help="Render metric charts",
        description="Draw fidelity/similarity, loss-component and learning-rate charts as SVG.",
    )
    parser.add_argument("--metrics", required=True, help="metrics.csv from a training run")
    parser.add_argument("--out", help="Output directory (default: next to the metrics file)")
    parser.add_argument("--smooth", type=smoothing_factor, default=0.6,
                        help="EMA smoothing for the loss plot, in [0, 1) (default 0.6)")
    parser.set_defaults(handler=run_plot)
