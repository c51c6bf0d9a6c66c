import os

from reportlab.lib import colors
from reportlab.lib.pagesizes import letter
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import inch
from reportlab.platypus import Image, Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle


class PdfReportService:
    """Service for PDF evaluation reports"""

    def generate_pdf_report(self, report, chart_path, filepath, run_id='run'):
        """
        Generate a PDF report with accuracy metrics and the prediction chart

        Args:
            report: EvalReport
            chart_path: Path to the chart image to include in the report
            filepath: Destination PDF path
            run_id: Run identifier shown in the subtitle

        Returns:
            Path to the generated PDF file
        """
        # invariant=1 keeps the output byte-identical across runs
        doc = SimpleDocTemplate(filepath, pagesize=letter, invariant=1)
        styles = getSampleStyleSheet()

        title_style = ParagraphStyle(
            'Title',
            parent=styles['Heading1'],
            fontSize=22,
            alignment=1,  # Center alignment
            spaceAfter=20
        )
        subtitle_style = ParagraphStyle(
            'Subtitle',
            parent=styles['Heading2'],
            fontSize=14,
            alignment=1,
            spaceAfter=12
        )

        content = [
            Paragraph("NG-RC Engine Twin Evaluation", title_style),
            Paragraph(f"Run: {run_id}", subtitle_style),
            Spacer(1, 0.25 * inch)
        ]

        if chart_path and os.path.exists(chart_path):
            img_width = 6.5 * inch
            content.append(Image(chart_path, width=img_width, height=img_width / 2))
            content.append(Spacer(1, 0.3 * inch))

        content.append(Paragraph("Accuracy", styles["Heading2"]))
        meta = report.metaparams
        data = [
            ["Metric", "Value"],
            ["Pooled NRMSE", f"{report.nrmse * 100:.3f} %"],
            ["Lookback k / skip s", f"{meta.k} / {meta.s}"],
            ["Ridge alpha", f"{meta.alpha:.1e}"],
            ["Training points", f"{report.n_train}"],
            ["Scored points", f"{report.n_test}"],
            ["Inference per step", f"{report.inference_per_step * 1e6:.2f} us"]
        ]
        if report.train_time is not None:
            data.append(["Training time", f"{report.train_time * 1e3:.2f} ms"])
        for index, start, end, value in report.slice_nrmse:
            shown = f"{value * 100:.3f} %" if value is not None else "n/a"
            data.append([f"Slice {index} [{start}, {end})", shown])

        table = Table(data, colWidths=[3.5 * inch, 2 * inch])
        table.setStyle(TableStyle([
            ('BACKGROUND', (0, 0), (1, 0), colors.lightgreen),
            ('FONTNAME', (0, 0), (1, 0), 'Helvetica-Bold'),
            ('BOTTOMPADDING', (0, 0), (1, 0), 8),
            ('GRID', (0, 0), (-1, -1), 0.5, colors.black),
            ('ALIGN', (1, 1), (1, -1), 'RIGHT'),
        ]))
        content.append(table)

        doc.build(content)
        return filepath
