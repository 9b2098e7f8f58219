#!/usr/bin/env python3
"""
Report Generator Module for the square-root diffusion laboratory

This module builds the markdown summaries written next to every command's
machine outputs. Reports carry no timestamps so reruns with the same seed
produce identical files.
"""

import math
from pathlib import Path

import numpy as np
import pandas as pd

TABLE_DIGITS = 6

# Settings that change how a run executes but not what it computes
RUN_ONLY_KEYS = ("workers", "out")


def format_number(value, digits=TABLE_DIGITS):
    """
    Human-readable number for markdown tables

    Args:
        value: Number, bool or string
        digits: Significant digits

    Returns:
        str
    """
    if isinstance(value, (bool, np.bool_)):
        return '✅ pass' if value else '❌ fail'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return f"{float(value):.{digits}g}"
    return str(value)


class ReportGenerator:
    def __init__(self, title, config=None):
        """
        Initialize report generator for one experiment

        Args:
            title: Report heading
            config: ExperimentConfig whose settings are listed in the header
        """
        self.title = title
        self.config = config
        self.sections = []

    def add_section(self, heading, text=''):
        """Append a level-2 section with optional paragraph text"""
        block = f"## {heading}\n"
        if text:
            block += f"\n{text.strip()}\n"
        self.sections.append(block)
        return self

    def add_table(self, frame, digits=TABLE_DIGITS, heading=None):
        """
        Append a DataFrame as a markdown table

        Args:
            frame: pandas DataFrame (index is dropped)
            digits: Significant digits for floats
            heading: Optional level-3 heading above the table
        """
        if not isinstance(frame, pd.DataFrame):
            frame = pd.DataFrame(frame)
        lines = []
        if heading:
            lines.append(f"### {heading}\n")
        columns = [str(c) for c in frame.columns]
        lines.append('| ' + ' | '.join(columns) + ' |')
        lines.append('|' + '|'.join('-' * (len(c) + 2) for c in columns) + '|')
        for row in frame.itertuples(index=False):
            lines.append('| ' + ' | '.join(format_number(v, digits) for v in row) + ' |')
        self.sections.append('\n'.join(lines) + '\n')
        return self

    def add_key_values(self, heading, mapping, digits=TABLE_DIGITS):
        """Append a two-column Key/Value table"""
        frame = pd.DataFrame({'Key': list(mapping.keys()), 'Value': list(mapping.values())})
        return self.add_table(frame, digits=digits, heading=heading)

    def add_verdict(self, label, passed, detail=''):
        """Append a one-line pass/fail verdict"""
        mark = '✅' if passed else '❌'
        line = f"- {mark} **{label}**"
        if detail:
            line += f": {detail}"
        self.sections.append(line + '\n')
        return self

    def render(self):
        """
        Build the markdown document

        Returns:
            str: Markdown text
        """
        parts = [f"# 📊 {self.title}\n"]
        if self.config is not None:
            parts.append(f"**Command**: `{self.config.command}`  \n**Seed**: `{self.config.seed}`\n")
            parts.append("## ⚙️ Configuration\n\n```\n" + self.config.as_record(exclude=RUN_ONLY_KEYS) + "```\n")
        parts.extend(self.sections)
        return '\n'.join(parts)

    def save(self, path):
        """
        Save report to markdown file

        Args:
            path: Output markdown path

        Returns:
            filepath: Path to saved file or None if failed
        """
        filepath = Path(path)
        try:
            filepath.parent.mkdir(parents=True, exist_ok=True)
            with open(filepath, 'w', encoding='utf-8', newline='\n') as f:
                f.write(self.render())
            print(f"📝 Report saved to: {filepath}")
            return filepath
        except OSError as e:
            print(f"✗ Error saving markdown report: {e}")
            return None
