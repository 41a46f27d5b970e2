"""morsepi: presentations of the fundamental group from stable Morse data."""

__version__ = "0.1.0"
