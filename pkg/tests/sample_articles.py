"""Shared article fixtures: real news excerpts used across the test suite."""

# Six one-paragraph statements from a Fox News segment about the Capitol
# Hill riots, all attributed to commentator Charles Hurt.
HURT_PARAGRAPHS = (
    'While Republicans look inward at the aftermath of the Capitol Hill '
    'riots after President Trump\'s address Wednesday, Democrats are adding '
    'to the division, Fox News contributor Charles Hurt told "Fox & '
    'Friends."',

    '"I get this rush to want to blame everything on President Trump. '
    'Everything that is going on right now has been in the making for years '
    'and decades, of which politicians on Capitol Hill have been a part," '
    'Hurt, Washington Times opinion editor, told co-host Brian Kilmeade.',

    'He added: "The last thing they want to do is take stock of themselves '
    'and try to figure out, \'OK, what have I done to make this worse or to '
    'create this situation?\'"',

    'Within seconds of reconvening Wednesday night, Democrats on Capitol '
    'Hill started "accusing Republicans of treason and sedition," Hurt '
    'said.',

    '"They get caught up in their own mob mentality, they\'re all trying to '
    'outdo one another on Twitter to see who can make the most outrageous '
    'charge or make the most outrageous demand of the other side," Hurt '
    'said.',

    'While this might be a good time for soul-searching for both parties, '
    'Hurt concluded, "There is no indication from Democrats on Capitol Hill '
    'that any one of them has any intention of doing that and certainly not '
    'from Joe Biden or Kamala Harris."',
)

HURT_ARTICLE = "\n\n".join(HURT_PARAGRAPHS)

# One paragraph of statements by a Purdue researcher about the Texas power
# outage; the last two segmenter sentences form a single running quote.
NATEGHI_PARAGRAPH = (
    'An issue facing all power grid operators, Nateghi of Purdue said, is '
    'adequately preparing for changes in climate. '
    "They're also not taking into account inter-dependencies in the system: "
    'You need water to generate electricity, and you need electricity to '
    'transport water, and so on and so forth, Nateghi said. '
    'And when the system is really stressed from an extreme event like it '
    "is in Texas, then we're seeing natural gas shortages which exacerbate "
    'the whole impact, she said. '
    'Nateghi, who researches sustainability and resilience of '
    'infrastructure, said other solutions such as upgraded equipment and '
    'infrastructure may not be as cost-effective, but are still crucial. '
    '"If we continue down the paradigm of what we\'ve done before we are '
    'going to see more extremes," Nateghi said. "These stories are going to '
    'just keep playing, and perhaps even more frequently."'
)

MUSK_SENTENCE = '"Starship landing nominal", Musk tweeted'

PFLUGERVILLE_SENTENCE = (
    '"One way to gather this water is to collect water dripping for your '
    'faucets to prevent freezing," the City of Pflugerville said in a tweet.'
)

FERGUSON_SENTENCE = (
    "Sir Alex Ferguson said the proposals would be a move away from '70 "
    "years of football history."
)

NO_SPEECH_SENTENCE = "The sun rose over the hills."
