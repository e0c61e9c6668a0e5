"""Topological Petersson products on complexified topological cusp forms."""
