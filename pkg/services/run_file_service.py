import io
import logging
import re
from pathlib import Path

import numpy as np
import pandas as pd

from models.dataset import Channel, RawRun
from models.errors import LoadError

logger = logging.getLogger(__name__)

CHANNEL_MARKER = '## channel'
UNIFORM_TOLERANCE = 1e-6
_HEADER_CELL = re.compile(r'^\s*(?P<name>[^\[\]]+?)\s*(\[(?P<unit>[^\]]*)\])?\s*$')


class RunFileService:
    """Reads and writes the CSV run formats.

    Multirate format: `# key: value` metadata lines, then one section per
    channel introduced by `## channel,<name>,<unit>,<rate>[,<start_time>]`
    with one value per line.

    Wide format: `# key: value` metadata lines, then a CSV table whose
    header holds `time` and `<name> [<unit>]` columns on a uniform grid.
    """

    def load_run(self, path):
        """
        Load a run file without resampling

        Args:
            path: Path to a multirate or wide run file

        Returns:
            RawRun with channels at their native rates and the run metadata
        """
        path = Path(path)
        if not path.exists():
            raise LoadError(path, 'file not found')
        lines = self._read_lines(path)

        meta, n_meta = self._read_metadata(path, lines)
        run_id = str(meta.get('run_id', path.stem))
        if any(line.startswith(CHANNEL_MARKER) for line in lines):
            channels = self._read_sections(path, lines, n_meta)
        else:
            channels = self._read_wide(path, lines, n_meta)

        logger.info("Loaded run %s from %s: %s", run_id, path.name,
                    ', '.join(f"{ch.name}@{ch.rate:g}" for ch in channels))
        return RawRun(run_id=run_id, channels=tuple(channels), meta=meta)

    @staticmethod
    def _read_lines(path):
        data = path.read_bytes()
        try:
            text = data.decode('utf-8-sig')
        except UnicodeDecodeError as e:
            raise LoadError(path, f'not UTF-8 text ({e.reason} at byte {e.start})',
                            row=data.count(b'\n', 0, e.start) + 1)
        return text.splitlines()

    @staticmethod
    def _table_rows(lines, start=0):
        """Non-blank, non-comment lines from `start` on, with their 1-based file rows"""
        rows, kept = [], []
        for n in range(start, len(lines)):
            stripped = lines[n].strip()
            if stripped and not stripped.startswith('#'):
                rows.append(n + 1)
                kept.append(lines[n])
        return rows, io.StringIO('\n'.join(kept))

    @staticmethod
    def _read_metadata(path, lines):
        meta = {}
        n = 0
        for n, line in enumerate(lines):
            if line.startswith(CHANNEL_MARKER) or not line.startswith('#'):
                break
            body = line.lstrip('#').strip()
            if not body:
                continue
            if ':' not in body:
                raise LoadError(path, "metadata line must read '# key: value'", row=n + 1, column=1)
            key, value = body.split(':', 1)
            meta[key.strip()] = value.strip()
        else:
            n = len(lines)
        return meta, n

    def _read_sections(self, path, lines, start):
        channels = []
        header = None
        values = []

        def close_section():
            if header is None:
                return
            name, unit, rate, t0, row = header
            if not values:
                raise LoadError(path, f"channel '{name}' has an empty data section", row=row)
            channels.append(Channel(name, unit, rate, np.array(values), t0))

        for n in range(start, len(lines)):
            row = n + 1
            line = lines[n].strip()
            if not line:
                continue
            if line.startswith(CHANNEL_MARKER):
                close_section()
                header = self._parse_section_header(path, line, row)
                values = []
                continue
            if line.startswith('#'):
                raise LoadError(path, 'metadata must precede the first channel section', row=row, column=1)
            if header is None:
                raise LoadError(path, 'value outside a channel section', row=row, column=1)
            values.append(self._parse_value(path, line, row, 1))
        close_section()

        if not channels:
            raise LoadError(path, 'no channel data found')
        names = [ch.name for ch in channels]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise LoadError(path, f"duplicate channel sections: {', '.join(duplicates)}")
        return channels

    def _parse_section_header(self, path, line, row):
        fields = [f.strip() for f in line.split(',')]
        if len(fields) not in (4, 5) or fields[0] != CHANNEL_MARKER or not fields[1]:
            raise LoadError(path, 'expected ## channel,<name>,<unit>,<rate>[,<start_time>]', row=row)
        rate = self._parse_value(path, fields[3], row, 4)
        if rate <= 0:
            raise LoadError(path, f'rate must be > 0, got {fields[3]}', row=row, column=4)
        t0 = self._parse_value(path, fields[4], row, 5) if len(fields) == 5 else 0.0
        return fields[1], fields[2], rate, t0, row

    @staticmethod
    def _parse_value(path, text, row, column):
        try:
            value = float(text)
        except ValueError:
            raise LoadError(path, f"non-numeric value '{text}'", row=row, column=column)
        if not np.isfinite(value):
            raise LoadError(path, f"non-finite value '{text}'", row=row, column=column)
        return value

    def _read_wide(self, path, lines, start):
        rows, table = self._table_rows(lines, start)
        if not rows:
            raise LoadError(path, 'empty data section')
        header_row = rows[0]
        try:
            frame = pd.read_csv(table, dtype=str, keep_default_na=False, skipinitialspace=True)
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise LoadError(path, f'malformed CSV: {e}', row=header_row)
        if frame.empty:
            raise LoadError(path, 'empty data section', row=header_row + 1)

        columns = []
        for col, label in enumerate(frame.columns, start=1):
            match = _HEADER_CELL.match(str(label))
            if not match or str(label).startswith('Unnamed'):
                raise LoadError(path, f"malformed header cell '{label}'", row=header_row, column=col)
            columns.append((match.group('name'), match.group('unit') or ''))
        names = [name for name, _ in columns]
        if 'time' not in names:
            raise LoadError(path, "wide run files need a 'time' column", row=header_row)

        data = {}
        for col, ((name, unit), label) in enumerate(zip(columns, frame.columns), start=1):
            numeric = pd.to_numeric(frame[label], errors='coerce').to_numpy(dtype=float)
            bad = np.flatnonzero(~np.isfinite(numeric))
            if len(bad):
                i = int(bad[0])
                raise LoadError(path, f"invalid value '{frame[label].iloc[i]}'", row=rows[i + 1], column=col)
            data[name] = (unit, numeric)

        time = data.pop('time')[1]
        if len(time) < 2:
            raise LoadError(path, 'wide run files need at least two rows to establish the rate')
        steps = np.diff(time)
        dt = float(np.median(steps))
        if dt <= 0 or np.max(np.abs(steps - dt)) > UNIFORM_TOLERANCE * max(dt, 1.0):
            raise LoadError(path, "'time' column must be strictly increasing on a uniform grid")
        rate = 1.0 / dt
        return [Channel(name, unit, rate, values, float(time[0])) for name, (unit, values) in data.items()]

    def write_run(self, path, ds, meta=None):
        """
        Write an aligned dataset in the wide run format

        Args:
            path: Destination file
            ds: RunDataset
            meta: Extra metadata written to the comment header (after the dataset's own)

        Returns:
            Path written
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = dict(ds.meta)
        header.update(meta or {})
        header['run_id'] = ds.run_id

        columns = {'time': ds.time}
        for name, values in ds.channels.items():
            unit = ds.units.get(name, '')
            columns[f"{name} [{unit}]" if unit else name] = values

        with open(path, 'w', newline='') as f:
            for key, value in header.items():
                f.write(f"# {key}: {value}\n")
            pd.DataFrame(columns).to_csv(f, index=False, lineterminator='\n')
        return path

    def load_calibration_readings(self, path):
        """
        Read calibration readings from a two-column CSV (volts, newtons)

        Args:
            path: CSV with 'volts' and 'newtons' columns; repeated newtons values are raw readings of one load

        Returns:
            List of (applied_force, voltage) pairs in file order
        """
        path = Path(path)
        if not path.exists():
            raise LoadError(path, 'file not found')
        rows, table = self._table_rows(self._read_lines(path))
        header_row = rows[0] if rows else 1
        try:
            frame = pd.read_csv(table, dtype=str, keep_default_na=False, skipinitialspace=True, comment='#')
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise LoadError(path, f'malformed CSV: {e}', row=header_row)

        columns = [str(c).strip().lower() for c in frame.columns]
        if 'volts' not in columns or 'newtons' not in columns:
            raise LoadError(path, "calibration files need 'volts' and 'newtons' columns", row=header_row)
        if frame.empty:
            raise LoadError(path, 'empty data section', row=header_row + 1)

        values = {}
        for name in ('volts', 'newtons'):
            col = columns.index(name)
            numeric = pd.to_numeric(frame.iloc[:, col], errors='coerce').to_numpy(dtype=float)
            bad = np.flatnonzero(~np.isfinite(numeric))
            if len(bad):
                i = int(bad[0])
                raise LoadError(path, f"invalid value '{frame.iloc[i, col]}'", row=rows[i + 1], column=col + 1)
            values[name] = numeric
        return list(zip(values['newtons'].tolist(), values['volts'].tolist()))

    @staticmethod
    def write_table(path, rows, columns=None):
        """Write a list of dicts (or a dict of columns) as CSV"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(rows, columns=columns)
        frame.to_csv(path, index=False, lineterminator='\n')
        return path
