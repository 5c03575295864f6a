import json
import os

from src.utils.config import CONFIG_PATH, get_default_config, merge_config, save_config


def update_config(path=CONFIG_PATH):
    """Update or create the config file, keeping existing values and adding new defaults"""
    print("=== Updating Config File ===")

    if not os.path.exists(path):
        print("No existing config file found. Creating new one...")
        save_config(get_default_config(), path)
        print("New config file created successfully!")
        return

    try:
        with open(path, 'r') as f:
            existing_config = json.load(f)
    except json.JSONDecodeError as e:
        print(f"Error reading config: {e}")
        print("Creating new config file...")
        save_config(get_default_config(), path)
        print("New config file created successfully!")
        return

    print("Found existing config file. Updating...")
    save_config(merge_config(get_default_config(), existing_config), path)
    print("Config file updated successfully!")


if __name__ == "__main__":
    update_config()
