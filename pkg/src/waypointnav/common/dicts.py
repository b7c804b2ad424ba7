"""Common functions for working with (config) dictionaries."""

from typing import Any, Union


def filter_dict(d: dict, filter_keys: Union[set, list], include: bool = False) -> dict:
    """
    Given a dictionary, return a new dictionary either including or excluding keys in `filter_keys`.

    Args:
        d: A dictionary to filter.
        filter_keys: A list or set of keys to either include or exclude.
        include: Keep only the keys in `filter_keys` rather than dropping them.

    Returns:
        A filtered dictionary, preserving the insertion order of `d`.

    Examples:
        >>> filter_dict({'a': 1, 'b': 2, 'c': 3}, {'a', 'b'})
        {'c': 3}
        >>> filter_dict({'a': 1, 'b': 2, 'c': 3}, {'a', 'b'}, include=True)
        {'a': 1, 'b': 2}
    """
    keys = set(filter_keys)
    return {k: v for k, v in d.items() if (k in keys) == include}


def get_key_by_value(d: dict, value: Any) -> Union[Any, None]:
    """
    Find the first key in a dictionary with a given value, or `None` if no such key exists.

    Examples:
        >>> get_key_by_value({'a': 1, 'b': 2, 'c': 1}, 2)
        'b'
    """
    return next((k for k, v in d.items() if v == value), None)


def normalise_key(key: str) -> str:
    """Map a config key onto its argparse destination, e.g. `rotate.a2` -> `rotate_a2`, `c-v` -> `c_v`."""
    return key.replace(".", "_").replace("-", "_")


def flatten_dict(d: dict[str, Any], joined: Union[set, list] = ()) -> dict[str, Any]:
    """
    Flatten a nested config dictionary until no nested keys remain. Module sections are dropped from the
    key (`{"train": {"gamma": 0.99}}` -> `{"gamma": 0.99}`), whereas the parents named in `joined` prefix
    their children (`{"rotate": {"a2": 1.0}}` -> `{"rotate_a2": 1.0}`). Dotted keys are normalised.

    Args:
        d: A dictionary with potentially nested keys.
        joined: Parent keys whose names are kept as a prefix of their children's.

    Returns:
        A flattened dictionary.

    Raises:
        ValueError: If duplicate keys are found in the flattened dictionary.

    Examples:
        >>> flatten_dict({'a': 1, 'b': {'c': 2, 'rotate': {'a2': 3}}}, joined={'rotate'})
        {'a': 1, 'c': 2, 'rotate_a2': 3}
    """
    items = []
    for k, v in d.items():
        if isinstance(v, dict):
            prefix = f"{normalise_key(k)}_" if k in joined else ""
            items.extend((prefix + ck, cv) for ck, cv in flatten_dict(v, joined).items())
        else:
            items.append((normalise_key(k), v))
    keys = [k for k, _ in items]
    duplicates = sorted({k for k in keys if keys.count(k) > 1})
    if duplicates:
        raise ValueError(f"Duplicate keys found in flattened dictionary: {duplicates}")
    return dict(items)
