#!/usr/bin/env python3
"""
CLI for the Common2 queue verifier
Exhaustive and random schedule suites, trace replay and native-thread stress runs

Exit codes: 0 success, 1 property violation, 2 usage error
"""
import argparse
import json
import os
import sys

# Add the current directory to the path so we can import our modules
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from system import config_loader, file_operations
from harness.history import HistoryError
from harness.sim_scheduler import ConfigError, RunConfig, ScheduleError, StepBoundExceeded
from harness.native_stress import StressConfig
from harness.lin_check import CheckerTimeout, MetadataError
from main import ReplayDivergence, replay_trace, run_native_stress, run_verification_suite

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2


def save_config(config_dict, config_path="config.json"):
    """Save configuration to JSON file"""
    with open(config_path, 'w', encoding='utf-8') as f:
        json.dump(config_dict, f, indent=2, ensure_ascii=False)
    print(f"✓ Configuration saved to {config_path}")


def load_config(config_path="config.json"):
    """Load configuration from JSON file"""
    if os.path.exists(config_path):
        try:
            with open(config_path, 'r', encoding='utf-8') as f:
                return json.load(f)
        except json.JSONDecodeError:
            print(f"⚠️  Error: {config_path} is not valid JSON!")
            return None
    return None


def apply_settings(settings):
    """Copy settings onto config_loader, skipping unset values and unknown keys."""
    for key, value in settings.items():
        if value is not None and hasattr(config_loader, key):
            setattr(config_loader, key, value)


def create_sample_config(path="sample_config.json"):
    """Create a sample configuration file holding every setting"""
    save_config(config_loader.current_settings(), path)
    print(f"Sample config created: {path}")
    print("Please review and edit the config file as needed!")


def build_parser():
    parser = argparse.ArgumentParser(
        description='Common2 queue verifier',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Every schedule of one enqueuer (2 enqs) and two dequeuers (1 deq each)
  python cli.py verify --algorithm semd --enqueuers 1 --dequeuers 2 --enq-ops 2 --deq-ops 1 --mode exhaustive

  # 10000 random schedules of a larger configuration
  python cli.py verify --algorithm semd --enq-ops 4 --dequeuers 3 --deq-ops 2 --mode random --seed 42

  # Re-execute a stored counterexample with loc/orderpt annotations
  python cli.py replay results/counterexamples/0123abcd.jsonl --annotate

  # Real threads over the lock-backed objects
  python cli.py stress-native --algorithm temd --dequeuers 4 --ops-per-thread 2000

  # Create sample config
  python cli.py --sample

Environment:
  COMMON2_CONFIG   configuration file (default: ./config.json)
  COMMON2_OUT_DIR  output directory (default for --out)
        """
    )
    parser.add_argument('--config', type=str, default=None,
                        help='Configuration file path (default: COMMON2_CONFIG or config.json)')
    parser.add_argument('--sample', action='store_true',
                        help='Create a sample configuration file and exit')
    sub = parser.add_subparsers(dest='command')

    verify = sub.add_parser('verify', help='Check every history of a configuration')
    verify.add_argument('--algorithm', choices=config_loader.ALGORITHM_CHOICES)
    verify.add_argument('--enqueuers', type=int)
    verify.add_argument('--dequeuers', type=int)
    verify.add_argument('--enq-ops', type=int, help='enq operations per enqueuer')
    verify.add_argument('--deq-ops', type=int, help='deq operations per dequeuer')
    verify.add_argument('--mode', choices=config_loader.MODE_CHOICES)
    verify.add_argument('--seed', type=int)
    verify.add_argument('--max-schedules', type=int, help='stop exhaustive runs after this many (0: no limit)')
    verify.add_argument('--random-schedules', type=int, help='schedules to draw in random mode')
    verify.add_argument('--max-total-steps', type=int, help='per-schedule step bound (0: derived)')
    verify.add_argument('--consensus-mode', choices=config_loader.CONSENSUS_MODE_CHOICES)
    verify.add_argument('--duplicate-items', action='store_true', default=None)
    verify.add_argument('--keep-passing', type=int, help='passing traces to store')
    verify.add_argument('--excel', action='store_true', default=None, help='also write the Excel report')
    verify.add_argument('--workers', type=int, help='worker processes for exhaustive runs')
    verify.add_argument('--out', type=str)

    replay = sub.add_parser('replay', help='Re-execute a stored trace')
    replay.add_argument('trace', type=str)
    replay.add_argument('--annotate', action='store_true', help='print loc, row and orderpt per operation')

    native = sub.add_parser('stress-native', help='Run real threads and check bounded windows')
    native.add_argument('--algorithm', choices=("semd", "temd"))
    native.add_argument('--dequeuers', type=int)
    native.add_argument('--ops-per-thread', type=int)
    native.add_argument('--duration-secs', type=float)
    native.add_argument('--window-size', type=int)
    native.add_argument('--seed', type=int)
    native.add_argument('--consensus-mode', choices=config_loader.CONSENSUS_MODE_CHOICES)
    native.add_argument('--out', type=str)
    return parser


def cmd_verify(args):
    apply_settings({
        "ALGORITHM": args.algorithm, "ENQUEUERS": args.enqueuers, "DEQUEUERS": args.dequeuers,
        "ENQ_OPS": args.enq_ops, "DEQ_OPS": args.deq_ops, "MODE": args.mode, "SEED": args.seed,
        "MAX_SCHEDULES": args.max_schedules, "RANDOM_SCHEDULES": args.random_schedules,
        "MAX_TOTAL_STEPS": args.max_total_steps, "CONSENSUS_MODE": args.consensus_mode,
        "DUPLICATE_ITEMS": args.duplicate_items, "KEEP_PASSING_TRACES": args.keep_passing,
        "EXPORT_EXCEL": args.excel, "OUT_DIR": args.out, "WORKERS": args.workers,
    })
    c = config_loader
    run_config = RunConfig.build(c.ALGORITHM, c.ENQUEUERS, c.DEQUEUERS, c.ENQ_OPS, c.DEQ_OPS,
                                 c.CONSENSUS_MODE, c.DUPLICATE_ITEMS, source=c.MODE,
                                 seed=c.SEED if c.MODE == "random" else None)
    report = run_verification_suite(run_config, c.MODE, c.SEED, c.MAX_SCHEDULES, c.RANDOM_SCHEDULES,
                                    c.MAX_TOTAL_STEPS, c.CHECKER_NODE_BUDGET, c.OUT_DIR,
                                    c.KEEP_PASSING_TRACES, c.VERBOSE, c.WORKERS)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_replay(args):
    if not os.path.exists(args.trace):
        print(f"❌ Trace file '{args.trace}' not found!")
        return EXIT_USAGE
    replay_trace(args.trace, args.annotate)
    return EXIT_OK


def cmd_stress_native(args):
    apply_settings({
        "ALGORITHM": args.algorithm, "DEQUEUERS": args.dequeuers, "OPS_PER_THREAD": args.ops_per_thread,
        "DURATION_SECS": args.duration_secs, "WINDOW_SIZE": args.window_size, "SEED": args.seed,
        "CONSENSUS_MODE": args.consensus_mode, "OUT_DIR": args.out,
    })
    c = config_loader
    stress_config = StressConfig(c.ALGORITHM, c.DEQUEUERS, c.OPS_PER_THREAD, c.DURATION_SECS, c.WINDOW_SIZE,
                                 c.SEED, c.CONSENSUS_MODE, c.CHECKER_NODE_BUDGET)
    report = run_native_stress(stress_config)
    return EXIT_OK if report.passed else EXIT_VIOLATION


COMMANDS = {
    "verify": cmd_verify,
    "replay": cmd_replay,
    "stress-native": cmd_stress_native,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.config:
        settings = load_config(args.config)
        if settings is None:
            print(f"❌ Config file '{args.config}' not found or invalid!")
            return EXIT_USAGE
        apply_settings(settings)

    if args.sample:
        create_sample_config()
        return EXIT_OK
    if args.command is None:
        parser.print_help()
        return EXIT_USAGE

    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ScheduleError) as e:
        print(f"❌ Usage error: {e}")
        return EXIT_USAGE
    except (ReplayDivergence, HistoryError, MetadataError) as e:
        print(f"❌ {type(e).__name__}: {e}")
        file_operations.log_error(args.command, e)
        return EXIT_VIOLATION
    except (StepBoundExceeded, CheckerTimeout) as e:
        print(f"❌ {type(e).__name__}: {e}")
        file_operations.log_error(args.command, e)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
