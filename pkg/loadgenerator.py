#!/usr/bin/env python3
"""
Finite problems read from external A.csv / b.csv files
"""

from pathlib import Path
from bundle import A_FILE, B_FILE, read_matrix_csv, read_vector_csv
from denselinalg import qr_lstsq
from generator import ProblemGenerator
from problem import LeastSquaresProblem


class LoadGenerator(ProblemGenerator):
    """Import a problem from a directory holding A.csv and b.csv"""

    family = 'load'

    def generate(self):
        source = Path(self.get_parameter('source', str))
        a = read_matrix_csv(source / A_FILE)
        b = read_vector_csv(source / B_FILE)
        return LeastSquaresProblem(a, b, x_star=qr_lstsq(a, b),
                                   meta={'source': str(source)})
