import os

import src.logger as Logger
from src.config import load_settings
from src.synthetic import habit_suite, init_bias_suite, junction_suite, write_suite


def create_junction(out_dir, per_goal, seed):
    entries = junction_suite(per_goal, seed)
    manifest = write_suite(entries, os.path.join(out_dir, "junction"))
    print(f"Wrote {len(entries)} junction sequences -> {manifest}")


def create_init_bias(out_dir, per_goal):
    entries = init_bias_suite(per_goal)
    manifest = write_suite(entries, os.path.join(out_dir, "init-bias"))
    print(f"Wrote {len(entries)} init-bias sequences -> {manifest}")


def create_habits(out_dir, per_goal, seed):
    entries = habit_suite(per_goal, seed)
    manifest = write_suite(entries, os.path.join(out_dir, "habit"))
    print(f"Wrote {len(entries)} habit sequences -> {manifest}")


def main():
    settings = load_settings()
    out_dir, per_goal, seed = settings.dataset_dir, settings.per_goal, settings.seed

    try:
        create_junction(out_dir, per_goal, seed)
        create_init_bias(out_dir, per_goal)
        create_habits(out_dir, per_goal, seed)
    except Exception as e:
        Logger.log(f"[!] Dataset creation failed: {e}", Logger.ERROR)
        raise
    print("Synthetic datasets created successfully!")


if __name__ == "__main__":
    main()
