from enum import Enum, auto

__doc__ = """Formatters for human-readable summaries
"""

__all__ = ["SummaryFormat", "SummaryLayout", "SummaryFormatter", "SummaryFormatterFactory"]


class SummaryFormat(Enum):
    PLAIN = auto()
    MARKDOWN = auto()


class SummaryLayout:
    """
    Class defining summary layout rules, such as indentation, line ending, etc.
    """

    default_endline = "\n"
    default_indent = " " * 2
    default_bullet = ""
    default_title_suffix = ":"

    def __init__(self, indent=None, endline=None, bullet=None, title_suffix=None):
        """
        :param indent: sequence of symbols used for indentation
        :param endline: symbol used for line ending
        :param bullet: prefix written in front of every nested line
        :param title_suffix: written after a block title
        """
        self.indent = self.default_indent if indent is None else indent
        self.endline = self.default_endline if endline is None else endline
        self.bullet = self.default_bullet if bullet is None else bullet
        self.title_suffix = self.default_title_suffix if title_suffix is None else title_suffix


class SummaryFormatter:
    """
    Indented block writer. Supports 'with' semantic:

    with formatter.block("build"):
        formatter("hidden layers: 12")

    build:
      hidden layers: 12
    """

    summary_layout = SummaryLayout()

    def __init__(self, writer, text=None, indent=None, summary_layout=None):
        """
        @param: writer - object with write(str)
        @param: text - block title
        """
        self.writer = writer
        self.summary_layout = summary_layout or self.summary_layout
        self.indent_level = 0 if indent is None else indent
        self.text = text

    def __call__(self, text, indent=None, endline=True):
        self.line(text, indent=indent, endline=endline)

    def __enter__(self):
        """Open summary block."""
        if self.text:
            self.title(self.text)
        self.indent_level += 1
        return self

    def __exit__(self, *_):
        """Close summary block."""
        self.indent_level -= 1

    def title(self, text):
        self.line(f"{text}{self.summary_layout.title_suffix}", bullet=False)

    def line(self, text, indent=None, endline=True, bullet=True):
        """Write one line into writer."""
        if indent is None:
            indent = self.indent_level
        prefix = self.summary_layout.bullet if bullet and indent > 0 and text else ""
        self.writer.write(
            f"{self.summary_layout.indent * indent}"
            f"{prefix}{text}"
            f"{self.summary_layout.endline if endline else ''}"
        )

    def block(self, text):
        return type(self)(
            writer=self.writer,
            text=text,
            indent=self.indent_level,
            summary_layout=self.summary_layout,
        )

    def newline(self, n=1):
        """
        Insert one or several empty lines
        """
        for _ in range(n):
            self.line(text="", indent=0)


class MarkdownSummaryFormatter(SummaryFormatter):
    """
    Blocks become headings at the top level and bold labels below it
    """

    summary_layout = SummaryLayout(indent="  ", bullet="- ", title_suffix="")

    def title(self, text):
        if self.indent_level == 0:
            self.line(f"## {text}", bullet=False)
        else:
            self.line(f"**{text}**")


class SummaryFormatterFactory:
    """
    Factory class for summary formatters
    """

    @staticmethod
    def get_summary_formatter(summary_format, summary_layout=None):
        """
        Create a new summary formatter class
        :param summary_format: SummaryFormat member
        """
        if summary_format == SummaryFormat.PLAIN:
            base = SummaryFormatter
        elif summary_format == SummaryFormat.MARKDOWN:
            base = MarkdownSummaryFormatter
        else:
            raise ValueError(f"Unknown summary format: {summary_format}")
        if summary_layout is None:
            return base
        return type("Formatter", (base,), {"summary_layout": summary_layout})
