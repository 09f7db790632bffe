"""Functions to manage output folders, config files and manifests.

Intended to be used within a Python 3 environment.

"""

import ast
import configparser
import json
import logging
import platform

from pathlib import Path

import h5py
import numpy as np
import pandas as pd
import scipy
import sklearn

from . import __version__


logger = logging.getLogger(__name__)


def create_non_existent_folder(folder_path):
    """Create a folder, and its parents, if it does not exist yet.

    Parameters
    ----------
    folder_path : Path
        Path of folder to verify/create.

    Returns
    -------
    Path
        Path of verified/created folder.
    """
    folder_path = Path(folder_path)
    if not folder_path.exists():
        folder_path.mkdir(parents=True)
        logger.info('%s folder created', folder_path)
    return folder_path


def extract_config_from_cfg(cfg_path):
    """Extract input data from *.cfg file.

    Parameters
    ----------
    cfg_path : Path
        Config file to read from.

    Returns
    -------
    dict
        Config keywords: python objects pairs, merged over sections.
    """
    # Start parser engine and read cfg file.
    cfg = configparser.ConfigParser()
    if not cfg.read(cfg_path):
        raise ValueError('Cannot read config file {}'.format(cfg_path))

    # Gather all input variables and merge them in one dict.
    config_dict = {}
    for section in cfg.sections():
        config_dict.update({k.lower(): v for k, v in cfg.items(section)})

    # Try to convert variables to Python objects.
    output_data = {}
    for k, value in config_dict.items():
        try:
            output_data[k] = ast.literal_eval(value)
        except (SyntaxError, ValueError):
            output_data[k] = value
    return output_data


def load_config_file(config_path):
    """Read a .json or .cfg config file into a flat dict.

    JSON files may nest values in sections (objects), which are merged
    like the sections of a .cfg file.

    Raises
    ------
    ValueError
        Unsupported suffix or malformed content.
    """
    config_path = Path(config_path)
    if config_path.suffix == '.cfg':
        return extract_config_from_cfg(config_path)
    if config_path.suffix != '.json':
        raise ValueError('Config file should be .json or .cfg, got {}'.format(
            config_path))
    try:
        with open(config_path, 'r', encoding='utf-8') as file_in:
            content = json.load(file_in)
    except json.JSONDecodeError as error:
        raise ValueError('{}: malformed JSON ({})'.format(config_path,
                                                          error.msg))
    if not isinstance(content, dict):
        raise ValueError('{}: expected a JSON object'.format(config_path))
    flat = {}
    for key, value in content.items():
        if isinstance(value, dict):
            flat.update({k.lower(): v for k, v in value.items()})
        else:
            flat[key.lower()] = value
    return flat


def write_json(data, json_path):
    """Dump JSON serializable data with sorted keys."""
    json_path = Path(json_path)
    with open(json_path, 'w', encoding='utf-8') as file_out:
        json.dump(data, file_out, indent=2, sort_keys=True)
        file_out.write('\n')
    return json_path


def software_versions():
    """Versions of Python and the numeric stack."""
    return {'python': platform.python_version(),
            'pyclstmcnn': __version__,
            'numpy': np.__version__,
            'scipy': scipy.__version__,
            'pandas': pd.__version__,
            'h5py': h5py.__version__,
            'scikit-learn': sklearn.__version__}


class OutputTracker:
    """Remember written files so a failed command can remove them."""

    def __init__(self, folder_path):
        self.folder = create_non_existent_folder(folder_path)
        self.paths = []

    def path(self, file_name):
        """Register and return a path inside the output folder."""
        file_path = Path(self.folder, file_name)
        self.paths.append(file_path)
        return file_path

    def remove_partial(self):
        """Delete every registered file that exists."""
        for file_path in self.paths:
            if file_path.exists():
                file_path.unlink()
                logger.warning('Removed partial output %s', file_path)
