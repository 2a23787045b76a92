"""Electron/ion scattering physics in atomic units."""
