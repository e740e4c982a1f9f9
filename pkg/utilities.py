import argparse
import json
import os
import sys

from pathlib import Path


STDIN = '-'


def readable(path):
    """
    Check if a path is readable
    :param path: Path to check
    :return: Readable path as a Path object
    """
    if not os.access(path, os.R_OK):
        raise argparse.ArgumentTypeError(f"{path} is not readable")
    return Path(path).absolute()


def readable_or_stdin(path):
    """
    Check if a path is readable, passing "-" through for standard input
    :param path: Path to check
    :return: Readable path as a Path object, or "-"
    """
    if path == STDIN:
        return STDIN
    return readable(path)


def writable(path):
    """
    Check if a path is writable
    :param path: Path to check
    :return: Writable path as a Path object
    """
    if not os.access(path, os.W_OK):
        raise argparse.ArgumentTypeError(f"{path} is not writable")
    return Path(path).absolute()


def available(path):
    """
    Check if a path has a parent and is available to write to
    :param path: Path to check
    :return: Available path as a Path object
    """
    parent = Path(path).parent.resolve()
    if not (parent.exists() and os.access(str(parent), os.W_OK)):
        raise argparse.ArgumentTypeError(f"{path} is either not writable or "
                                         "the parent directory does not exist")

    if Path(path).exists():
        return writable(path)
    else:
        return Path(path).absolute()


def positive_int(value):
    """
    Check that a command line value is a positive integer
    :param value: String from the command line
    :return: The integer
    """
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value} is not an integer")
    if number < 1:
        raise argparse.ArgumentTypeError(f"{value} is not positive")
    return number


def load_json(path):
    """
    Read one JSON document from a file or, for "-", from standard input
    """
    if path == STDIN:
        return json.load(sys.stdin)
    with open(path, 'r') as file:
        return json.load(file)


def write_report(text, output=None):
    if output is None:
        sys.stdout.write(text + '\n')
        return
    with open(output, 'w') as file:
        file.write(text + '\n')
