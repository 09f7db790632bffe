"""Functions to manage pandas tables and hdf5 databases.

Intended to be used within a Python 3 environment.

"""

import json
import logging

from pathlib import Path

import h5py
import numpy as np


logger = logging.getLogger(__name__)


class H5(h5py.File):
    """A class to add functionally to h5py objects.

    Groups hold flat collections of named arrays; JSON serializable
    metadata lives in attributes of the file root.
    """

    def save_arrays(self, group_name, arrays, attrs=None):
        """Store named arrays as datasets of a new group.

        Parameters
        ----------
        group_name : str
            Root level group to create.
        arrays : dict
            Dataset name: numpy array pairs, stored in dict order. Lists
            of str are stored as UTF-8 string datasets.
        attrs : dict, optional
            If given, set as group attributes.

        Returns
        -------
        h5py Group
            Created group.
        """
        grp = self.create_group(group_name)
        for key, value in arrays.items():
            if isinstance(value, (list, tuple)):
                grp.create_dataset(key, data=[str(v) for v in value],
                                   dtype=h5py.string_dtype('utf-8'))
            else:
                grp.create_dataset(key, data=value)
        if attrs:
            grp.attrs.update(attrs)
        return grp

    def load_arrays(self, group_name):
        """Read every dataset of a group into memory.

        Returns
        -------
        dict
            Dataset name: numpy array pairs.

        Raises
        ------
        ValueError
            Group not present in the file.
        """
        if group_name not in self:
            raise ValueError('{}: missing group {!r}'.format(self.filename,
                                                             group_name))
        arrays = {}
        for key, dts in self[group_name].items():
            if h5py.check_string_dtype(dts.dtype) is not None:
                arrays[key] = list(dts.asstr()[()])
            else:
                arrays[key] = np.array(dts)
        return arrays

    def set_json_attr(self, key, value):
        """Store a JSON serializable object as a root attribute."""
        self.attrs[key] = json.dumps(value, sort_keys=True)

    def get_json_attr(self, key):
        """Read a root attribute written by `set_json_attr`.

        Raises
        ------
        ValueError
            Attribute missing or not valid JSON.
        """
        if key not in self.attrs:
            raise ValueError('{}: missing attribute {!r}'.format(self.filename,
                                                                 key))
        try:
            return json.loads(self.attrs[key])
        except (TypeError, json.JSONDecodeError):
            raise ValueError('{}: attribute {!r} is not valid JSON'.format(
                self.filename, key))


def save_dataframe_safely(data_frame, output_csv, overwrite=False):
    """Save pandas dataframe as csv, avoiding accidental overwriting.

    Parameters
    ----------
    data_frame : pandas DataFrame
        To be saved as csv.
    output_csv : Path
        Path of output csv file.
    overwrite : bool, optional
        If True, allow overwrite of output file.

    Returns
    -------
    Path
        Path of csv file.

    Raises
    ------
    FileExistsError
        Output exists and overwriting is not allowed.
    """
    output_csv = Path(output_csv).with_suffix('.csv')
    if output_csv.exists():
        if not overwrite:
            raise FileExistsError('{} exists, not overwritten'.format(
                output_csv))
        logger.warning('Overwriting %s', output_csv)
    data_frame.to_csv(output_csv, index=False, float_format='%.17g')
    logger.info('Saved %d rows to %s', len(data_frame), output_csv)
    return output_csv
