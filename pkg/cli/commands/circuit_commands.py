"""
Circuit Commands
================

Prints the encoder circuit gate by gate with its rotation-parameter count.
"""

from models.quantum_autoencoder import circuit_listing, rotation_parameter_count
from models.train_config import TrainConfig, log_dimension_conflicts
from services.checkpoint_service import load_checkpoint

from .train_commands import add_config_arguments, resolve_config


def run_inspect_circuit(args) -> int:
    """Handle ``qsmiles inspect-circuit``."""
    log_dimension_conflicts()
    if args.checkpoint:
        cfg = TrainConfig.from_dict(load_checkpoint(args.checkpoint).config)
    else:
        cfg = resolve_config(args)
    qae = cfg.qae

    entries = circuit_listing(qae)
    print(f"qubits: {qae.n_total}")
    print(f"latent_qubits: {','.join(str(q) for q in qae.latent_qubits)}")
    print(f"trash_qubits: {','.join(str(q) for q in qae.trash_qubits) or '-'}")
    print(f"layers: {qae.n_layers}")
    print("layer  gate qubits  param")
    for entry in entries:
        print(entry.render())
    print(f"parameters: {rotation_parameter_count(entries)}")
    return 0


def setup(subparsers):
    """Register the inspect-circuit subcommand."""
    parser = subparsers.add_parser(
        "inspect-circuit",
        help="List the encoder circuit",
        description="Print every gate (layer, gate, qubits, parameter index) and the rotation-parameter count.",
    )
    add_config_arguments(parser)
    parser.add_argument("--checkpoint", help="Read the configuration stored in a checkpoint instead")
    parser.set_defaults(handler=run_inspect_circuit)
