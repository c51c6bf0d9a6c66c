import matplotlib
import numpy as np

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402


class ChartGenerationService:
    """Service for rendering truth-vs-prediction charts"""

    def generate_chart(self, trace, filepath, title='Predicted engine thrust', unit='N'):
        """
        Plot actual and predicted target over time with training slices shaded

        Args:
            trace: PredictionTrace from an evaluation
            filepath: Output PNG path
            title: Chart title
            unit: Target unit for the y-axis label

        Returns:
            Path to the generated chart image file
        """
        fig, ax = plt.subplots(figsize=(10, 5))

        # Shade every contiguous run of training samples
        is_train = np.asarray(trace.label) == 'train'
        if is_train.any():
            edges = np.flatnonzero(np.diff(np.concatenate([[0], is_train.astype(int), [0]])))
            for start, end in zip(edges[::2], edges[1::2]):
                ax.axvspan(trace.time[start], trace.time[end - 1], color='#1aaf6c', alpha=0.2, linewidth=0)

        ax.plot(trace.time, trace.truth, color='black', linewidth=1.0, label='actual')
        ax.plot(trace.time, trace.prediction, color='#d62728', linewidth=1.0, linestyle='--', label='NG-RC')

        ax.set_xlabel('time [s]')
        ax.set_ylabel(f'thrust [{unit}]' if unit else 'thrust')
        ax.set_title(title)
        ax.legend(loc='upper right')
        ax.grid(True, linestyle='--', linewidth=0.5, alpha=0.5)

        fig.tight_layout()
        fig.savefig(filepath, dpi=150, metadata={'Software': None})
        plt.close(fig)  # Close the figure to free memory

        return filepath
