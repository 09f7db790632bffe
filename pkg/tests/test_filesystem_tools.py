# -*- coding: utf-8 -*-
"""Tests for filesystem_tools module."""

import json

import pytest

from pyclstmcnn import filesystem_tools as ft


def test_config_extractor(tmp_path):
    """A simple test for config file reader function.

    Check that extracted values correspond to Python objects.
    """

    # Create temporal cfg file.
    example_cfg = tmp_path / 'temporal_file.cfg'
    lines = ["[MODEL]",
             "KERNEL_SIZES = [2, 3, 4]",
             "ALPHA_CONT = 0.9",
             "[TRAINING]",
             "EPOCHS = 3",
             "OPTIMIZER = adamax",
             "[OUTPUT]",
             "FOLDER = 'results/'",
             ]
    example_cfg.write_text('\n'.join(lines))

    # Execute tests.
    config_dict = ft.extract_config_from_cfg(example_cfg)
    assert config_dict['kernel_sizes'] == [2, 3, 4]
    assert isinstance(config_dict['alpha_cont'], float)
    assert isinstance(config_dict['epochs'], int)
    assert config_dict['optimizer'] == 'adamax'
    assert config_dict['folder'] == 'results/'
    assert ft.load_config_file(example_cfg) == config_dict


def test_load_config_file_json(tmp_path):
    """Sections of a JSON config are flattened like cfg sections."""
    example_json = tmp_path / 'config.json'
    example_json.write_text(json.dumps({'model': {'alpha_cont': 0.5},
                                        'EPOCHS': 4}))
    assert ft.load_config_file(example_json) == {'alpha_cont': 0.5,
                                                 'epochs': 4}


@pytest.mark.parametrize('name, content', [('config.yaml', 'a: 1'),
                                           ('config.json', '{"a": '),
                                           ('config.json', '[1, 2]'),
                                           ('missing.cfg', None)])
def test_load_config_file_errors(tmp_path, name, content):
    config_path = tmp_path / name
    if content is not None:
        config_path.write_text(content)
    with pytest.raises(ValueError):
        ft.load_config_file(config_path)


def test_output_tracker(tmp_path):
    """Registered files are removed, others are kept."""
    tracker = ft.OutputTracker(tmp_path / 'run' / 'nested')
    assert tracker.folder.is_dir()
    written = ft.write_json({'b': 1, 'a': [1, 2]}, tracker.path('a.json'))
    assert json.loads(written.read_text()) == {'a': [1, 2], 'b': 1}
    tracker.path('never_written.csv')
    other = tracker.folder / 'other.txt'
    other.write_text('keep')

    tracker.remove_partial()
    assert not written.exists()
    assert other.exists()


def test_software_versions():
    versions = ft.software_versions()
    assert set(versions) >= {'python', 'pyclstmcnn', 'numpy', 'scipy',
                             'scikit-learn'}
