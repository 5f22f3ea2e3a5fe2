"""
KyleSuite
Adquisición flexible de información en el modelo de Kyle.
"""

# This program is free software; you can redistribute it and/or
# modify it under the terms of the GNU General Public License
# as published by the Free Software Foundation; either version 2
# of the License, or (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program; if not, write to the Free Software
# Foundation, Inc., 51 Franklin Street, Fifth Floor, Boston, MA  02110-1301, USA.

__all__ = [
    "__title__",
    "__summary__",
    "__uri__",
    "__version__",
    "__author__",
    "__email__",
    "__license__",
    "__copyright__",
]

__title__ = "KyleSuite"
__summary__ = "Adquisición flexible de información en el modelo de Kyle"
__uri__ = "https://github.com/kylesuite/KyleSuite"

__version__ = "0.3.1"

__author__ = "KyleSuite developers"
__email__ = "kylesuite@users.noreply.github.com"

__license__ = "GNU General Public License v2"
__copyright__ = f"2024, {__author__}"
