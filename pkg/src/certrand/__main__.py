"""python -m certrand delegates to the command-line front door."""

from .cli import main

main()
