import json
import sys

from memnet.core.text_layout import SummaryFormat, SummaryFormatterFactory

__doc__ = """
Writers for what memnet tells its user.

Machine output is JSON (write_json); human summaries are indented text blocks:

report = ReportFile(None, writer=sys.stderr)
with report.block("projection") as block:
    block("bound: 4113")
    block("attempts: 2")

projection:
  bound: 4113
  attempts: 2

Domain objects render themselves through render_summary(report).
"""

__all__ = ["ReportFile", "stderr_report", "write_json"]


class ReportFile:
    """
    Summary destination: a file name or an already open writer
    """

    def __init__(self, filename, formatter=None, writer=None):
        """
        Creates a new report
        @param: filename report file to create (rewrite if exists), ignored with a writer
        @param: formatter SummaryFormat of the text
        @param: writer optional writer to write output to
        """
        self.filename = filename
        if not isinstance(formatter, SummaryFormat) and formatter is not None:
            raise TypeError(f"formatter must be an instance of {SummaryFormat.__name__}")
        self.formatter = formatter if formatter is not None else SummaryFormat.PLAIN
        self.owns_writer = writer is None
        self.out = writer if writer is not None else open(filename, "w")
        self.summary_formatter = SummaryFormatterFactory.get_summary_formatter(self.formatter)

    def close(self):
        """
        Close the handle if the report opened it
        """
        if self.owns_writer and self.out is not None:
            self.out.close()
        self.out = None

    def write(self, text, indent=0, endline=True):
        """
        Write a new line with line ending
        """
        self.summary_formatter(self.out).line(text, indent, endline)

    def __call__(self, text, indent=0, endline=True):
        self.write(text, indent, endline)

    def block(self, text=None):
        """
        Returns an indented block, supports 'with' semantic
        """
        return self.summary_formatter(self.out, text=text)

    def newline(self, n=1):
        for _ in range(n):
            self.write(text="", indent=0)

    def __enter__(self):
        return self

    def __exit__(self, *_):
        self.close()


def stderr_report(formatter=None):
    return ReportFile(None, formatter=formatter, writer=sys.stderr)


def write_json(data, writer=None, indent=2):
    """Write a JSON document (plus newline) to writer, stdout by default."""
    writer = sys.stdout if writer is None else writer
    writer.write(json.dumps(data, indent=indent, sort_keys=False))
    writer.write("\n")
